use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::padic::{Ball1D, FieldContext, PAdicVec3, Polydisc3};
use crate::spinor::Spinor4;

use super::WaveletIndex3D;

pub const DEFAULT_CELL_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegrationOptions {
    pub cell_cap: u128,
    pub exec: Execution,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            cell_cap: DEFAULT_CELL_CAP,
            exec: Execution::default(),
        }
    }
}

impl IntegrationOptions {
    pub fn with_exec(exec: Execution) -> Self {
        IntegrationOptions {
            exec,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub disc: Polydisc3,
    pub value: Spinor4,
}

/// A finite family of pairwise disjoint polydiscs, each carrying a constant
/// C⁴ value. The function vanishes off the cells.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantFunction {
    ctx: FieldContext,
    cells: Vec<Cell>,
}

/// `∫_B f` per component, `∫_B |f|²`, and the exact measure of `B ∩ supp f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub components: Spinor4,
    pub norm_sq: f64,
    pub measure: BigRational,
    pub cells: usize,
}

impl LocallyConstantFunction {
    /// Checks contexts and pairwise disjointness of the cells.
    pub fn new(ctx: FieldContext, cells: Vec<Cell>) -> Result<Self> {
        for c in &cells {
            ctx.check_same(c.disc.ctx())?;
        }
        for i in 0..cells.len() {
            for k in i + 1..cells.len() {
                if cells[i].disc.intersect(&cells[k].disc).is_some() {
                    return Err(Error::OverlappingCells { first: i, second: k });
                }
            }
        }
        Ok(LocallyConstantFunction { ctx, cells })
    }

    /// Scalar-valued function stored in the first spinor component.
    pub fn scalar(ctx: FieldContext, cells: Vec<(Polydisc3, Complex64)>) -> Result<Self> {
        let cells = cells
            .into_iter()
            .map(|(disc, v)| Cell {
                disc,
                value: scalar_spinor(v),
            })
            .collect();
        LocallyConstantFunction::new(ctx, cells)
    }

    pub fn zero(ctx: FieldContext) -> Self {
        LocallyConstantFunction { ctx, cells: Vec::new() }
    }

    /// Evaluates `f` at one point of every cell of `partition`.
    pub fn tabulate<F>(partition: &Partition3, exec: Execution, f: F) -> Self
    where
        F: Fn(&PAdicVec3) -> Spinor4 + Sync + Send,
    {
        let cells = exec::map_range(exec, partition.len(), |i| {
            let disc = partition.cell(i);
            let value = f(&disc.center());
            Cell { disc, value }
        });
        LocallyConstantFunction {
            ctx: partition.ctx,
            cells,
        }
    }

    /// `Σ_k amplitude_k ψ_k` on the common constancy partition of the terms,
    /// optionally restricted to `restrict`.
    pub fn from_expansion(
        ctx: FieldContext,
        terms: &[(WaveletIndex3D, Spinor4)],
        restrict: Option<&Polydisc3>,
        opts: &IntegrationOptions,
    ) -> Result<Self> {
        for (idx, _) in terms {
            ctx.check_same(idx.ctx())?;
        }
        let indices: Vec<&WaveletIndex3D> = terms.iter().map(|(k, _)| k).collect();
        let partition = Partition3::build(ctx, &indices, restrict, opts.cell_cap)?;
        let tables: [Vec<Vec<Complex64>>; 3] = [0, 1, 2].map(|axis| {
            partition.atoms[axis]
                .iter()
                .map(|atom| indices.iter().map(|idx| idx.axis(axis).eval(atom.center())).collect())
                .collect()
        });
        let cells = exec::map_range(opts.exec, partition.len(), |i| {
            let [a1, a2, a3] = partition.cells[i];
            let mask = partition.cell_mask(partition.cells[i]);
            let mut value = Spinor4::zeros();
            for k in mask.iter() {
                let w = tables[0][a1][k] * tables[1][a2][k] * tables[2][a3][k];
                value += terms[k].1 * w;
            }
            Cell {
                disc: partition.cell(i),
                value,
            }
        });
        Ok(LocallyConstantFunction { ctx, cells })
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn eval(&self, x: &PAdicVec3) -> Spinor4 {
        self.cells
            .iter()
            .find(|c| c.disc.contains_point(x))
            .map(|c| c.value)
            .unwrap_or_else(Spinor4::zeros)
    }

    /// Pointwise product `f · conj(g)` component by component, on the common
    /// refinement of both cell families.
    pub fn times_conj(&self, other: &LocallyConstantFunction) -> Result<LocallyConstantFunction> {
        self.ctx.check_same(other.ctx)?;
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if let Some(disc) = a.disc.intersect(&b.disc) {
                    let value = a.value.zip_map(&b.value, |x, y| x * y.conj());
                    cells.push(Cell { disc, value });
                }
            }
        }
        Ok(LocallyConstantFunction { ctx: self.ctx, cells })
    }

    /// Exact Haar quadrature over `b`. Each cell meets `b` in a polydisc or
    /// not at all, so `B ∩ supp f` is partitioned into constancy polydiscs.
    pub fn refine_and_integrate(&self, b: &Polydisc3, opts: &IntegrationOptions) -> Result<Integral> {
        self.ctx.check_same(b.ctx())?;
        let required = self.cells.len() as u128;
        if required > opts.cell_cap {
            return Err(Error::CellCapExceeded {
                required,
                cap: opts.cell_cap,
            });
        }
        let pieces = exec::map(opts.exec, &self.cells, |cell| {
            cell.disc.intersect(b).map(|piece| {
                let mu = piece.measure();
                let w = mu.to_f64().unwrap_or(f64::NAN);
                (cell.value * Complex64::from(w), cell.value.norm_squared() * w, mu)
            })
        });
        let pieces: Vec<_> = pieces.into_iter().flatten().collect();
        let per_component: Vec<Complex64> = (0..4)
            .map(|c| exec::pairwise_sum_complex(&pieces.iter().map(|p| p.0[c]).collect::<Vec<_>>()))
            .collect();
        let norm_sq = exec::pairwise_sum(&pieces.iter().map(|p| p.1).collect::<Vec<_>>());
        let measure = pieces.iter().fold(BigRational::zero(), |acc, p| acc + &p.2);
        Ok(Integral {
            components: Spinor4::from_column_slice(&per_component),
            norm_sq,
            measure,
            cells: pieces.len(),
        })
    }
}

pub(crate) fn scalar_spinor(v: Complex64) -> Spinor4 {
    let z = Complex64::new(0.0, 0.0);
    Spinor4::new(v, z, z, z)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(bits: usize) -> Self {
        BitSet(vec![0; bits.div_ceil(64)])
    }

    fn insert(&mut self, k: usize) {
        self.0[k / 64] |= 1 << (k % 64);
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// The coarsest product partition of the union of wavelet supports on
/// which every wavelet is constant.
///
/// Per axis the supports and constancy balls form a tree of nested balls;
/// the atoms are its leaves. Cells are the products of atoms lying inside
/// the support of at least one wavelet.
#[derive(Debug, Clone)]
pub struct Partition3 {
    ctx: FieldContext,
    atoms: [Vec<Ball1D>; 3],
    masks: [Vec<BitSet>; 3],
    cells: Vec<[usize; 3]>,
}

impl Partition3 {
    pub fn for_indices(
        ctx: FieldContext,
        indices: &[WaveletIndex3D],
        restrict: Option<&Polydisc3>,
        cell_cap: u128,
    ) -> Result<Self> {
        let refs: Vec<&WaveletIndex3D> = indices.iter().collect();
        Partition3::build(ctx, &refs, restrict, cell_cap)
    }

    fn build(
        ctx: FieldContext,
        indices: &[&WaveletIndex3D],
        restrict: Option<&Polydisc3>,
        cell_cap: u128,
    ) -> Result<Self> {
        if let Some(b) = restrict {
            ctx.check_same(b.ctx())?;
        }
        let mut atoms: [Vec<Ball1D>; 3] = Default::default();
        for (axis, slot) in atoms.iter_mut().enumerate() {
            let comps: BTreeMap<_, (Ball1D, i64)> = indices
                .iter()
                .map(|idx| {
                    let a = idx.axis(axis);
                    let supp = a.support();
                    let key = (supp.radius(), supp.center().clone(), a.constancy_radius());
                    (key, (supp, a.constancy_radius()))
                })
                .collect();
            let comps: Vec<(Ball1D, i64)> = comps.into_values().collect();
            let raw = axis_atoms(&comps, restrict.map(|b| b.axis(axis)), cell_cap)?;
            *slot = match restrict {
                Some(b) => raw.iter().filter_map(|a| a.intersect(b.axis(axis))).collect(),
                None => raw,
            };
        }
        let required = atoms.iter().fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128));
        if required > cell_cap {
            return Err(Error::CellCapExceeded {
                required,
                cap: cell_cap,
            });
        }
        let masks: [Vec<BitSet>; 3] = [0, 1, 2].map(|axis| {
            atoms[axis]
                .iter()
                .map(|atom| {
                    let mut m = BitSet::new(indices.len());
                    for (k, idx) in indices.iter().enumerate() {
                        if atom.is_subset_of(&idx.axis(axis).support()) {
                            m.insert(k);
                        }
                    }
                    m
                })
                .collect()
        });
        let mut cells = Vec::new();
        for (a1, m1) in masks[0].iter().enumerate() {
            for (a2, m2) in masks[1].iter().enumerate() {
                let m12 = m1.and(m2);
                if m12.is_empty() {
                    continue;
                }
                for (a3, m3) in masks[2].iter().enumerate() {
                    if !m12.and(m3).is_empty() {
                        cells.push([a1, a2, a3]);
                    }
                }
            }
        }
        Ok(Partition3 {
            ctx,
            atoms,
            masks,
            cells,
        })
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn atoms(&self, axis: usize) -> &[Ball1D] {
        &self.atoms[axis]
    }

    pub fn cell(&self, i: usize) -> Polydisc3 {
        let [a1, a2, a3] = self.cells[i];
        Polydisc3::from_axes_unchecked([
            self.atoms[0][a1].clone(),
            self.atoms[1][a2].clone(),
            self.atoms[2][a3].clone(),
        ])
    }

    fn cell_mask(&self, c: [usize; 3]) -> BitSet {
        self.masks[0][c[0]].and(&self.masks[1][c[1]]).and(&self.masks[2][c[2]])
    }
}

/// Leaves of the refinement tree on one axis. `comps` holds
/// `(support, constancy radius)` pairs; branches missing `within` are pruned.
fn axis_atoms(comps: &[(Ball1D, i64)], within: Option<&Ball1D>, cap: u128) -> Result<Vec<Ball1D>> {
    let keep = |b: &Ball1D| within.is_none_or(|w| w.intersect(b).is_some());
    let mut roots: Vec<&Ball1D> = Vec::new();
    let mut by_radius: Vec<&Ball1D> = comps.iter().map(|(b, _)| b).collect();
    by_radius.sort_by_key(|b| std::cmp::Reverse(b.radius()));
    for b in by_radius {
        if !roots.iter().any(|r| b.is_subset_of(r)) {
            roots.push(b);
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Ball1D, Vec<usize>)> = roots
        .into_iter()
        .filter(|root| keep(root))
        .map(|root| {
            let rel = (0..comps.len())
                .filter(|&k| comps[k].0.intersect(root).is_some())
                .collect();
            (root.clone(), rel)
        })
        .collect();
    while let Some((ball, relevant)) = stack.pop() {
        let split = relevant.iter().any(|&k| {
            let (supp, constancy) = &comps[k];
            (supp.radius() < ball.radius()) || (ball.radius() > *constancy)
        });
        if !split {
            out.push(ball);
            if out.len() as u128 > cap {
                return Err(Error::CellCapExceeded {
                    required: out.len() as u128,
                    cap,
                });
            }
            continue;
        }
        for child in ball.children().into_iter().filter(|c| keep(c)) {
            let rel: Vec<usize> = relevant
                .iter()
                .copied()
                .filter(|&k| comps[k].0.intersect(&child).is_some())
                .collect();
            stack.push((child, rel));
        }
    }
    out.sort_by(|a, b| (a.center(), a.radius()).cmp(&(b.center(), b.radius())));
    Ok(out)
}
