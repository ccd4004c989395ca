//! Final BASE/CHECK/FAIL/OUTPOS storage in the four layout/format pairings.

/// CHECK value for the root and vacant ids under the Basic format.
pub const NO_PARENT: u32 = u32::MAX;

/// BASE of leaves and vacant ids under the Basic format. Its block lies
/// past every allocatable id, so probing from it always misses.
pub const LEAF_BASE_BASIC: u32 = u32::MAX;

/// BASE of leaves and vacant ids under the Compact format (24-bit field).
pub const LEAF_BASE_COMPACT: u32 = 0x00FF_FFFF;

/// Read access shared by every layout.
pub trait StateArray {
    const BYTES_PER_STATE: usize;

    fn len(&self) -> usize;
    fn base(&self, s: u32) -> u32;
    /// CHECK field: parent id under Basic, label under Compact.
    fn check(&self, t: u32) -> u32;
    fn fail(&self, s: u32) -> u32;
    fn outpos(&self, s: u32) -> u32;
    /// `BASE[s] ^ label` if the CHECK condition holds there.
    fn child(&self, s: u32, label: u32) -> Option<u32>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndividualBasic {
    pub base: Vec<u32>,
    pub check: Vec<u32>,
    pub fail: Vec<u32>,
    pub outpos: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndividualCompact {
    pub base: Vec<u32>,
    pub check: Vec<u8>,
    pub fail: Vec<u32>,
    pub outpos: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(C)]
pub struct BasicRecord {
    pub base: u32,
    pub check: u32,
    pub fail: u32,
    pub outpos: u32,
}

/// 24-bit base and 8-bit check share one word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(C)]
pub struct CompactRecord {
    pub base_check: u32,
    pub fail: u32,
    pub outpos: u32,
}

impl CompactRecord {
    pub fn new(base: u32, check: u8, fail: u32, outpos: u32) -> Self {
        debug_assert!(base <= LEAF_BASE_COMPACT);
        Self {
            base_check: base << 8 | u32::from(check),
            fail,
            outpos,
        }
    }

    #[inline]
    pub fn base(&self) -> u32 {
        self.base_check >> 8
    }

    #[inline]
    pub fn check(&self) -> u8 {
        self.base_check as u8
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedBasic(pub Vec<BasicRecord>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedCompact(pub Vec<CompactRecord>);

impl StateArray for IndividualBasic {
    const BYTES_PER_STATE: usize = 16;

    fn len(&self) -> usize {
        self.base.len()
    }
    #[inline]
    fn base(&self, s: u32) -> u32 {
        self.base[s as usize]
    }
    #[inline]
    fn check(&self, t: u32) -> u32 {
        self.check[t as usize]
    }
    #[inline]
    fn fail(&self, s: u32) -> u32 {
        self.fail[s as usize]
    }
    #[inline]
    fn outpos(&self, s: u32) -> u32 {
        self.outpos[s as usize]
    }
    #[inline]
    fn child(&self, s: u32, label: u32) -> Option<u32> {
        let t = self.base[s as usize] ^ label;
        match self.check.get(t as usize) {
            Some(&p) if p == s => Some(t),
            _ => None,
        }
    }
}

impl StateArray for IndividualCompact {
    const BYTES_PER_STATE: usize = 13;

    fn len(&self) -> usize {
        self.base.len()
    }
    #[inline]
    fn base(&self, s: u32) -> u32 {
        self.base[s as usize]
    }
    #[inline]
    fn check(&self, t: u32) -> u32 {
        u32::from(self.check[t as usize])
    }
    #[inline]
    fn fail(&self, s: u32) -> u32 {
        self.fail[s as usize]
    }
    #[inline]
    fn outpos(&self, s: u32) -> u32 {
        self.outpos[s as usize]
    }
    #[inline]
    fn child(&self, s: u32, label: u32) -> Option<u32> {
        let t = self.base[s as usize] ^ label;
        match self.check.get(t as usize) {
            Some(&c) if u32::from(c) == label => Some(t),
            _ => None,
        }
    }
}

impl StateArray for PackedBasic {
    const BYTES_PER_STATE: usize = std::mem::size_of::<BasicRecord>();

    fn len(&self) -> usize {
        self.0.len()
    }
    #[inline]
    fn base(&self, s: u32) -> u32 {
        self.0[s as usize].base
    }
    #[inline]
    fn check(&self, t: u32) -> u32 {
        self.0[t as usize].check
    }
    #[inline]
    fn fail(&self, s: u32) -> u32 {
        self.0[s as usize].fail
    }
    #[inline]
    fn outpos(&self, s: u32) -> u32 {
        self.0[s as usize].outpos
    }
    #[inline]
    fn child(&self, s: u32, label: u32) -> Option<u32> {
        let t = self.0[s as usize].base ^ label;
        match self.0.get(t as usize) {
            Some(r) if r.check == s => Some(t),
            _ => None,
        }
    }
}

impl StateArray for PackedCompact {
    const BYTES_PER_STATE: usize = std::mem::size_of::<CompactRecord>();

    fn len(&self) -> usize {
        self.0.len()
    }
    #[inline]
    fn base(&self, s: u32) -> u32 {
        self.0[s as usize].base()
    }
    #[inline]
    fn check(&self, t: u32) -> u32 {
        u32::from(self.0[t as usize].check())
    }
    #[inline]
    fn fail(&self, s: u32) -> u32 {
        self.0[s as usize].fail
    }
    #[inline]
    fn outpos(&self, s: u32) -> u32 {
        self.0[s as usize].outpos
    }
    #[inline]
    fn child(&self, s: u32, label: u32) -> Option<u32> {
        let t = self.0[s as usize].base() ^ label;
        match self.0.get(t as usize) {
            Some(r) if u32::from(r.check()) == label => Some(t),
            _ => None,
        }
    }
}

/// One of the four concrete tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum States {
    IndividualBasic(IndividualBasic),
    IndividualCompact(IndividualCompact),
    PackedBasic(PackedBasic),
    PackedCompact(PackedCompact),
}

/// Runs `$body` with `$arr` bound to the concrete table.
macro_rules! with_states {
    ($states:expr, $arr:ident => $body:expr) => {
        match $states {
            $crate::dabuild::states::States::IndividualBasic($arr) => $body,
            $crate::dabuild::states::States::IndividualCompact($arr) => $body,
            $crate::dabuild::states::States::PackedBasic($arr) => $body,
            $crate::dabuild::states::States::PackedCompact($arr) => $body,
        }
    };
}
pub(crate) use with_states;

impl States {
    pub fn len(&self) -> usize {
        with_states!(self, a => a.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bytes_per_state(&self) -> usize {
        fn per<A: StateArray>(_: &A) -> usize {
            A::BYTES_PER_STATE
        }
        with_states!(self, a => per(a))
    }

    pub fn heap_bytes(&self) -> usize {
        self.len() * self.bytes_per_state()
    }

    pub fn base(&self, s: u32) -> u32 {
        with_states!(self, a => a.base(s))
    }

    pub fn check(&self, t: u32) -> u32 {
        with_states!(self, a => a.check(t))
    }

    pub fn fail(&self, s: u32) -> u32 {
        with_states!(self, a => a.fail(s))
    }

    pub fn outpos(&self, s: u32) -> u32 {
        with_states!(self, a => a.outpos(s))
    }

    pub fn child(&self, s: u32, label: u32) -> Option<u32> {
        with_states!(self, a => a.child(s, label))
    }
}
