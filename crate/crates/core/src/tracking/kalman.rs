//! Constant-velocity Kalman filter over the box state
//! `[u, v, s, r, u', v', s']` (center, area, aspect ratio, and the
//! per-frame rates of the first three).

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::BBox;

pub type StateVector = SVector<f64, 7>;
pub type StateCovariance = SMatrix<f64, 7, 7>;
type Observation = SVector<f64, 4>;
type ObservationMatrix = SMatrix<f64, 4, 7>;

/// Noise parameters. All values are variances on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanConfig {
    /// Measurement noise on `(u, v, s, r)`.
    pub measurement_noise: [f64; 4],
    /// Process noise on the full state.
    pub process_noise: [f64; 7],
    /// Covariance assigned to a freshly initiated track.
    pub initial_variance: [f64; 7],
}

impl Default for KalmanConfig {
    fn default() -> Self {
        KalmanConfig {
            measurement_noise: [1.0, 1.0, 10.0, 10.0],
            process_noise: [1.0, 1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-4],
            initial_variance: [10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4],
        }
    }
}

/// Kalman state of a single track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub mean: StateVector,
    pub covariance: StateCovariance,
}

impl TrackState {
    pub fn u(&self) -> f64 {
        self.mean[0]
    }
    pub fn v(&self) -> f64 {
        self.mean[1]
    }
    pub fn s(&self) -> f64 {
        self.mean[2]
    }
    pub fn r(&self) -> f64 {
        self.mean[3]
    }
    pub fn du(&self) -> f64 {
        self.mean[4]
    }
    pub fn dv(&self) -> f64 {
        self.mean[5]
    }
    pub fn ds(&self) -> f64 {
        self.mean[6]
    }

    /// Center-format box implied by the state. Fails when the area or
    /// aspect ratio is not positive.
    pub fn to_bbox(&self, conf: f64) -> Result<BBox> {
        let (s, r) = (self.s(), self.r());
        if !(s > 0.0 && r > 0.0) {
            return Err(Error::DegeneratePrediction);
        }
        let w = (s * r).sqrt();
        BBox::new(self.u(), self.v(), w, s / w, conf)
    }

    /// Largest absolute asymmetry `max |P - P^T|`.
    pub fn asymmetry(&self) -> f64 {
        let p = &self.covariance;
        (p - p.transpose()).abs().max()
    }
}

/// `(u, v, s, r)` observation of a box.
pub fn observe(b: &BBox) -> [f64; 4] {
    [b.cx, b.cy, b.w * b.h, b.w / b.h]
}

#[derive(Debug, Clone)]
pub struct KalmanFilter {
    config: KalmanConfig,
    transition: StateCovariance,
    observation: ObservationMatrix,
}

impl Default for KalmanFilter {
    fn default() -> Self {
        Self::new(KalmanConfig::default())
    }
}

impl KalmanFilter {
    pub fn new(config: KalmanConfig) -> Self {
        let mut transition = StateCovariance::identity();
        for i in 0..3 {
            transition[(i, i + 4)] = 1.0;
        }
        let mut observation = ObservationMatrix::zeros();
        for i in 0..4 {
            observation[(i, i)] = 1.0;
        }
        KalmanFilter {
            config,
            transition,
            observation,
        }
    }

    pub fn config(&self) -> &KalmanConfig {
        &self.config
    }

    /// State for a new track: the observation with zero rates.
    pub fn initiate(&self, b: &BBox) -> TrackState {
        let z = observe(b);
        let mean = StateVector::from_column_slice(&[z[0], z[1], z[2], z[3], 0.0, 0.0, 0.0]);
        let covariance =
            StateCovariance::from_diagonal(&StateVector::from_column_slice(&self.config.initial_variance));
        TrackState { mean, covariance }
    }

    /// One frame of constant-velocity propagation. Returns
    /// [`Error::DegeneratePrediction`] when the predicted area is not positive.
    pub fn predict(&self, state: &TrackState) -> Result<TrackState> {
        let f = &self.transition;
        let mean = f * state.mean;
        if !(mean[2] > 0.0) {
            return Err(Error::DegeneratePrediction);
        }
        let q = StateCovariance::from_diagonal(&StateVector::from_column_slice(&self.config.process_noise));
        let covariance = symmetrize(f * state.covariance * f.transpose() + q);
        Ok(TrackState { mean, covariance })
    }

    /// Corrects the state with a box measurement.
    pub fn update(&self, state: &TrackState, meas: &BBox) -> Result<TrackState> {
        let h = &self.observation;
        let z = Observation::from_column_slice(&observe(meas));
        let r = SMatrix::<f64, 4, 4>::from_diagonal(&Observation::from_column_slice(
            &self.config.measurement_noise,
        ));
        let innovation = z - h * state.mean;
        let s = symmetrize4(h * state.covariance * h.transpose() + r);
        let chol = s.cholesky().ok_or(Error::NumericalUpdate)?;
        // K = P H^T S^-1, solved as S K^T = H P.
        let gain = chol.solve(&(h * state.covariance)).transpose();
        let mean = state.mean + gain * innovation;

        // Joseph form keeps P symmetric positive semi-definite.
        let i_kh = StateCovariance::identity() - gain * h;
        let covariance =
            symmetrize(i_kh * state.covariance * i_kh.transpose() + gain * r * gain.transpose());
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalUpdate);
        }
        Ok(TrackState { mean, covariance })
    }
}

fn symmetrize(p: StateCovariance) -> StateCovariance {
    (p + p.transpose()) * 0.5
}

fn symmetrize4(p: SMatrix<f64, 4, 4>) -> SMatrix<f64, 4, 4> {
    (p + p.transpose()) * 0.5
}
