//! Multi-objective MAP-Elites archive: one bounded Pareto front per CVT cell.

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::pareto::{crowding_distances, dominates};
use crate::tessellation::Tessellation;
use crate::types::Solution;

/// Capacity value used for fronts that never evict.
pub const UNBOUNDED: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub enum InsertOutcome {
    Added,
    /// The front overflowed; the returned solution was removed. It may be the
    /// candidate itself.
    AddedWithEviction(Solution),
    Dominated,
    Duplicate,
}

impl InsertOutcome {
    /// Whether the candidate is stored after the call.
    pub fn is_stored(&self, candidate: &Solution) -> bool {
        match self {
            InsertOutcome::Added => true,
            InsertOutcome::AddedWithEviction(evicted) => evicted != candidate,
            InsertOutcome::Dominated | InsertOutcome::Duplicate => false,
        }
    }
}

/// Rule for choosing which member leaves an overfull front.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eviction {
    /// Remove the member with the smallest crowding distance.
    Crowding,
    /// Remove a uniformly random member.
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParetoFront {
    members: Vec<Solution>,
    capacity: usize,
}

impl ParetoFront {
    pub fn new(capacity: usize) -> Self {
        ParetoFront {
            members: Vec::new(),
            capacity,
        }
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn fitnesses(&self) -> Vec<&[f64]> {
        self.members.iter().map(|s| s.fitness.as_slice()).collect()
    }

    /// Index of the crowding-eviction victim: minimum crowding distance, ties
    /// broken towards the lexicographically smallest fitness.
    fn crowding_victim(&self) -> usize {
        let scores = crowding_distances(&self.fitnesses());
        (0..self.members.len())
            .min_by(|&a, &b| {
                scores[a].total_cmp(&scores[b]).then_with(|| {
                    let (fa, fb) = (&self.members[a].fitness, &self.members[b].fitness);
                    fa.iter()
                        .zip(fb.iter())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
            })
            .expect("overfull front is non-empty")
    }

    fn insert_with(&mut self, candidate: Solution, victim: impl FnOnce(&Self) -> usize) -> InsertOutcome {
        for member in &self.members {
            if member.fitness == candidate.fitness {
                return InsertOutcome::Duplicate;
            }
            if dominates(&member.fitness, &candidate.fitness) {
                return InsertOutcome::Dominated;
            }
        }
        self.members
            .retain(|member| !dominates(&candidate.fitness, &member.fitness));
        self.members.push(candidate);
        if self.members.len() > self.capacity {
            let idx = victim(self);
            InsertOutcome::AddedWithEviction(self.members.remove(idx))
        } else {
            InsertOutcome::Added
        }
    }

    fn push_unchecked(&mut self, s: Solution) {
        self.members.push(s);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoArchive {
    tessellation: Tessellation,
    fronts: Vec<ParetoFront>,
    capacity: usize,
}

impl MoArchive {
    pub fn new(tessellation: Tessellation, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("front capacity must be at least 1".into()));
        }
        let fronts = vec![ParetoFront::new(capacity); tessellation.num_cells()];
        Ok(MoArchive {
            tessellation,
            fronts,
            capacity,
        })
    }

    pub fn tessellation(&self) -> &Tessellation {
        &self.tessellation
    }

    pub fn fronts(&self) -> &[ParetoFront] {
        &self.fronts
    }

    pub fn front(&self, cell: usize) -> Option<&ParetoFront> {
        self.fronts.get(cell)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn num_cells(&self) -> usize {
        self.fronts.len()
    }

    pub fn len(&self) -> usize {
        self.fronts.iter().map(ParetoFront::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.fronts.iter().all(ParetoFront::is_empty)
    }

    /// Number of objectives of the stored solutions, if any are stored.
    pub fn num_objectives(&self) -> Option<usize> {
        self.solutions().next().map(|s| s.fitness.len())
    }

    pub fn solutions(&self) -> impl Iterator<Item = &Solution> {
        self.fronts.iter().flat_map(|f| f.members.iter())
    }

    /// Ascending indices of the occupied cells.
    pub fn cells_nonempty(&self) -> Vec<usize> {
        self.fronts
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    fn locate_checked(&self, solution: &Solution) -> Result<usize> {
        if solution.fitness.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fitness"));
        }
        if let Some(m) = self.num_objectives() {
            check_len(m, solution.fitness.len())?;
        }
        self.tessellation.locate(&solution.feature)
    }

    /// Inserts with crowding-distance eviction.
    pub fn insert(&mut self, solution: Solution) -> Result<InsertOutcome> {
        let cell = self.locate_checked(&solution)?;
        Ok(self.fronts[cell].insert_with(solution, ParetoFront::crowding_victim))
    }

    /// Inserts evicting a uniformly random member on overflow.
    pub fn insert_uniform<R: Rng + ?Sized>(&mut self, solution: Solution, rng: &mut R) -> Result<InsertOutcome> {
        let cell = self.locate_checked(&solution)?;
        Ok(self.fronts[cell].insert_with(solution, |f| rng.random_range(0..f.len())))
    }

    pub fn insert_with<R: Rng + ?Sized>(
        &mut self,
        solution: Solution,
        eviction: Eviction,
        rng: &mut R,
    ) -> Result<InsertOutcome> {
        match eviction {
            Eviction::Crowding => self.insert(solution),
            Eviction::Uniform => self.insert_uniform(solution, rng),
        }
    }

    /// Rebuilds an archive from stored cell contents, checking every invariant.
    pub fn from_parts(
        tessellation: Tessellation,
        capacity: usize,
        cells: Vec<(usize, Solution)>,
    ) -> Result<Self> {
        let mut archive = MoArchive::new(tessellation, capacity)?;
        for (cell, s) in cells {
            if cell >= archive.num_cells() {
                return Err(Error::Validation(format!("cell index {cell} out of range")));
            }
            let located = archive
                .locate_checked(&s)
                .map_err(|e| Error::Validation(e.to_string()))?;
            if located != cell {
                return Err(Error::Validation(format!(
                    "solution stored in cell {cell} but its feature maps to cell {located}"
                )));
            }
            archive.fronts[cell].push_unchecked(s);
        }
        archive.validate()?;
        Ok(archive)
    }

    /// Checks capacity, mutual non-dominance, uniqueness and cell consistency.
    pub fn validate(&self) -> Result<()> {
        for (cell, front) in self.fronts.iter().enumerate() {
            if front.len() > self.capacity {
                return Err(Error::Validation(format!(
                    "cell {cell} holds {} solutions, capacity {}",
                    front.len(),
                    self.capacity
                )));
            }
            for (i, a) in front.members.iter().enumerate() {
                if self.tessellation.locate(&a.feature)? != cell {
                    return Err(Error::Validation(format!("solution in cell {cell} is misplaced")));
                }
                for b in &front.members[i + 1..] {
                    if a.fitness.len() != b.fitness.len() {
                        return Err(Error::Validation("mixed objective counts".into()));
                    }
                    if a.fitness == b.fitness {
                        return Err(Error::Validation(format!("duplicate fitness in cell {cell}")));
                    }
                    if dominates(&a.fitness, &b.fitness) || dominates(&b.fitness, &a.fitness) {
                        return Err(Error::Validation(format!("dominated member in cell {cell}")));
                    }
                }
            }
        }
        Ok(())
    }
}
