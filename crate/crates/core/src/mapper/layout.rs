use std::fmt;

/// Marker for "not assigned" in both directions of a [`Mapping`].
pub const UNMAPPED: u8 = u8::MAX;

/// Largest architecture a [`Mapping`] can describe.
pub const MAX_PHYSICAL: u32 = 254;

/// Partial injective assignment of logical qubits to physical qubits, stored both ways.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    log_to_phys: Vec<u8>,
    phys_to_log: Vec<u8>,
}

impl Mapping {
    /// Empty mapping for `n` logical and `m` physical qubits.
    pub fn empty(num_logical: u32, num_physical: u32) -> Self {
        assert!(num_physical <= MAX_PHYSICAL, "at most {MAX_PHYSICAL} physical qubits");
        assert!(num_logical <= num_physical, "more logical than physical qubits");
        Mapping {
            log_to_phys: vec![UNMAPPED; num_logical as usize],
            phys_to_log: vec![UNMAPPED; num_physical as usize],
        }
    }

    /// Mapping with `assignment[q] = Some(physical)`. Panics if the result is not injective.
    pub fn from_assignment(num_physical: u32, assignment: &[Option<u32>]) -> Self {
        let mut m = Mapping::empty(assignment.len() as u32, num_physical);
        for (q, p) in assignment.iter().enumerate() {
            if let Some(p) = *p {
                m.assign(q as u32, p);
            }
        }
        m
    }

    /// Total mapping with `physical[q]` the position of logical qubit `q`.
    pub fn from_physical(num_physical: u32, physical: &[u32]) -> Self {
        let assignment: Vec<Option<u32>> = physical.iter().map(|&p| Some(p)).collect();
        Mapping::from_assignment(num_physical, &assignment)
    }

    pub fn num_logical(&self) -> u32 {
        self.log_to_phys.len() as u32
    }

    pub fn num_physical(&self) -> u32 {
        self.phys_to_log.len() as u32
    }

    pub fn physical(&self, logical: u32) -> Option<u32> {
        match self.log_to_phys[logical as usize] {
            UNMAPPED => None,
            p => Some(p as u32),
        }
    }

    pub fn logical(&self, physical: u32) -> Option<u32> {
        match self.phys_to_log[physical as usize] {
            UNMAPPED => None,
            q => Some(q as u32),
        }
    }

    pub fn is_free(&self, physical: u32) -> bool {
        self.phys_to_log[physical as usize] == UNMAPPED
    }

    pub fn is_total(&self) -> bool {
        self.log_to_phys.iter().all(|&p| p != UNMAPPED)
    }

    pub fn assign(&mut self, logical: u32, physical: u32) {
        assert!(self.physical(logical).is_none(), "q{logical} already mapped");
        assert!(self.is_free(physical), "Q{physical} already occupied");
        self.log_to_phys[logical as usize] = physical as u8;
        self.phys_to_log[physical as usize] = logical as u8;
    }

    /// Exchanges the contents of two physical qubits (either may be empty).
    pub fn swap_physical(&mut self, a: u32, b: u32) {
        let (la, lb) = (self.phys_to_log[a as usize], self.phys_to_log[b as usize]);
        self.phys_to_log[a as usize] = lb;
        self.phys_to_log[b as usize] = la;
        if la != UNMAPPED {
            self.log_to_phys[la as usize] = b as u8;
        }
        if lb != UNMAPPED {
            self.log_to_phys[lb as usize] = a as u8;
        }
    }

    /// Positions of all logical qubits, `None` where unmapped.
    pub fn assignment(&self) -> Vec<Option<u32>> {
        (0..self.num_logical()).map(|q| self.physical(q)).collect()
    }

    /// Positions of all logical qubits. Panics on a partial mapping.
    pub fn to_physical_vec(&self) -> Vec<u32> {
        (0..self.num_logical())
            .map(|q| self.physical(q).expect("mapping is not total"))
            .collect()
    }

    pub(crate) fn raw_log_to_phys(&self) -> &[u8] {
        &self.log_to_phys
    }

    pub fn free_physical(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.num_physical()).filter(|&p| self.is_free(p))
    }
}

impl fmt::Debug for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for q in 0..self.num_logical() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            match self.physical(q) {
                Some(p) => write!(f, "q{q}->Q{p}")?,
                None => write!(f, "q{q}->_")?,
            }
        }
        Ok(())
    }
}

/// A SWAP between two adjacent physical qubits, stored as `(low, high)`.
pub type Swap = (u32, u32);

/// SWAPs inserted between two layers, grouped into steps of pairwise-disjoint SWAPs that can
/// run concurrently. Steps apply in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PermutationLayer {
    pub steps: Vec<Vec<Swap>>,
}

impl PermutationLayer {
    pub fn is_empty(&self) -> bool {
        self.steps.iter().all(Vec::is_empty)
    }

    pub fn swap_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn swaps(&self) -> impl Iterator<Item = Swap> + '_ {
        self.steps.iter().flatten().copied()
    }

    pub fn apply(&self, mapping: &mut Mapping) {
        for (a, b) in self.swaps() {
            mapping.swap_physical(a, b);
        }
    }
}
