use crate::error::Result;
use crate::metrics::{interference_covariance, interference_plus_noise, stream_interference_plus_noise, user_covariance};
use crate::model::{Beamformers, ChannelSet, StreamPowers};
use crate::numerics::{gevd_hpd, hermitian_eig_sorted, normalize_columns, solve_hpd, CMat};

/// Receive-filter update rule. Applied to the reciprocal network it yields
/// the precoder update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiveRule {
    /// Eigenvectors of the `d_k` smallest eigenvalues of `Q_k`, ascending.
    LeastInterference,
    /// `B_{k,l}⁻¹ H_kk u_{k,l}`, normalized.
    MaxSinr,
    /// `B_k⁻¹ H_kk u_{k,l}`, normalized.
    MaxSinrModified,
    /// Top `d_k` generalized eigenvectors of `(R_k, B_k)`, normalized.
    GeneralizedEigen,
}

impl ReceiveRule {
    /// New receive filters for every user given the precoders in `bf.u`.
    /// `bf.v` is ignored.
    pub fn receive_filters(self, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<Vec<CMat>> {
        (0..channels.users())
            .map(|k| self.user_filter(k, channels, bf, powers))
            .collect()
    }

    fn user_filter(self, k: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<CMat> {
        let d = bf.u[k].ncols();
        let h = channels.get(k, k);
        match self {
            ReceiveRule::LeastInterference => {
                let q = interference_covariance(k, channels, bf, powers, false, None)?;
                let eig = hermitian_eig_sorted(&q);
                Ok(eig.vectors.columns(0, d).into_owned())
            }
            ReceiveRule::MaxSinr => {
                let mut v = CMat::zeros(h.nrows(), d);
                for l in 0..d {
                    let b = stream_interference_plus_noise(k, l, channels, bf, powers)?;
                    let hu = h * bf.u[k].column(l);
                    let col = solve_hpd(&b, &CMat::from_column_slice(hu.len(), 1, hu.as_slice()))?;
                    v.set_column(l, &col.column(0));
                }
                normalize_columns(&mut v);
                Ok(v)
            }
            ReceiveRule::MaxSinrModified => {
                let b = interference_plus_noise(k, channels, bf, powers)?;
                let mut v = solve_hpd(&b, &(h * &bf.u[k]))?;
                normalize_columns(&mut v);
                Ok(v)
            }
            ReceiveRule::GeneralizedEigen => {
                let r = user_covariance(k, channels, bf, powers)?;
                let b = interference_plus_noise(k, channels, bf, powers)?;
                let g = gevd_hpd(&r, &b)?;
                let mut v = g.vectors.columns(0, d).into_owned();
                normalize_columns(&mut v);
                Ok(v)
            }
        }
    }
}
