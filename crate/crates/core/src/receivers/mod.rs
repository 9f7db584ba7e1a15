//! Pilot-based receive filters, soft detection and QPSK decisions.
//!
//! A filter `A` (`M×K`) is applied as `x̃ = Aᴴy`; the hard decision is the
//! quadrant of each `x̃_k`.

mod estimation;
mod pilots;

pub use estimation::{
    ls_channel_estimate, ls_direct_filter, map_channel_estimate, map_log_posterior, LsOptions, MapGrid,
    MAP_SEARCH_CAP,
};
pub use pilots::{orthogonal_pilots, PilotBlock, PilotLength, PilotStyle};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{norm_sqr, pseudoinverse, ComplexMatrix};
use crate::signal::{ChannelMatrix, QpskSymbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimateProvenance {
    FullCsi,
    LeastSquares,
    Map,
}

/// Channel knowledge `Ĥ` used to build MRC/ZF filters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    matrix: ComplexMatrix,
    provenance: EstimateProvenance,
}

impl ChannelEstimate {
    pub fn new(matrix: ComplexMatrix, provenance: EstimateProvenance) -> Self {
        Self { matrix, provenance }
    }

    /// Perfect CSI: `Ĥ = H`.
    pub fn full(h: &ChannelMatrix) -> Self {
        Self::new(h.clone(), EstimateProvenance::FullCsi)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> EstimateProvenance {
        self.provenance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterKind {
    Mrc,
    Zf,
    DirectLs,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Mrc => "mrc",
            FilterKind::Zf => "zf",
            FilterKind::DirectLs => "direct_ls",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveFilter {
    matrix: ComplexMatrix,
    kind: FilterKind,
}

impl ReceiveFilter {
    pub fn from_parts(matrix: ComplexMatrix, kind: FilterKind) -> Self {
        Self { matrix, kind }
    }

    /// The `M×K` matrix `A`.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }
}

/// Matched filter: `aⁱ = ĥⁱ/‖ĥⁱ‖²` for every column.
pub fn mrc_filter(est: &ChannelEstimate) -> Result<ReceiveFilter> {
    let h = est.matrix();
    let (m, k) = h.shape();
    let mut norms = Vec::with_capacity(k);
    for j in 0..k {
        let n2 = norm_sqr(&h.column(j));
        if n2 == 0.0 {
            return Err(Error::DegenerateChannel { column: j });
        }
        norms.push(n2);
    }
    let a = ComplexMatrix::from_fn(m, k, |i, j| h[(i, j)] / norms[j]);
    Ok(ReceiveFilter::from_parts(a, FilterKind::Mrc))
}

/// Zero forcing: `Aᴴ = Ĥ† = (ĤᴴĤ)⁻¹Ĥᴴ`.
pub fn zf_filter(est: &ChannelEstimate) -> Result<ReceiveFilter> {
    let pinv = pseudoinverse(est.matrix())?;
    Ok(ReceiveFilter::from_parts(pinv.hermitian(), FilterKind::Zf))
}

/// `x̃ = Aᴴy` for a quantized or unquantized observation.
pub fn soft_detect(filter: &ReceiveFilter, y: &[Complex64]) -> Result<Vec<Complex64>> {
    filter.matrix.hermitian_mul_vec(y)
}

/// Per-user quadrant decision, ties to +1 on each axis.
pub fn demodulate(soft: &[Complex64]) -> Vec<QpskSymbol> {
    soft.iter().map(|&z| QpskSymbol::from_quadrant(z)).collect()
}
