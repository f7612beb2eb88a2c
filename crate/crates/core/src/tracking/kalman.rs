//! Constant-velocity Kalman filter over boxes in `[u, v, s, r]` form
//! (center, area, aspect ratio).

use nalgebra::{SMatrix, SVector};

use crate::bbox::BBox2D;

pub type StateVec = SVector<f64, 7>;
pub type StateCov = SMatrix<f64, 7, 7>;
type Meas = SVector<f64, 4>;
type MeasMat = SMatrix<f64, 4, 7>;

/// Smallest box area kept by the filter, in px².
pub const MIN_AREA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanBoxState {
    /// `[u, v, s, r, du, dv, ds]`.
    pub x: StateVec,
    pub p: StateCov,
}

pub fn box_to_z(b: &BBox2D) -> Meas {
    let (u, v) = b.center();
    Meas::new(u, v, b.width * b.height, b.width / b.height)
}

fn transition() -> StateCov {
    let mut f = StateCov::identity();
    f[(0, 4)] = 1.0;
    f[(1, 5)] = 1.0;
    f[(2, 6)] = 1.0;
    f
}

fn observation() -> MeasMat {
    let mut h = MeasMat::zeros();
    for i in 0..4 {
        h[(i, i)] = 1.0;
    }
    h
}

fn process_noise() -> StateCov {
    StateCov::from_diagonal(&StateVec::from_column_slice(&[
        1.0, 1.0, 1.0, 0.01, 0.01, 0.01, 0.0001,
    ]))
}

fn measurement_noise() -> SMatrix<f64, 4, 4> {
    SMatrix::<f64, 4, 4>::from_diagonal(&Meas::new(1.0, 1.0, 10.0, 0.01))
}

impl KalmanBoxState {
    /// Filter initialized on a box with zero velocity and a wide velocity prior.
    pub fn new(b: &BBox2D) -> Self {
        let z = box_to_z(b);
        let x = StateVec::from_column_slice(&[z[0], z[1], z[2], z[3], 0.0, 0.0, 0.0]);
        let p = StateCov::from_diagonal(&StateVec::from_column_slice(&[
            10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4,
        ]));
        Self { x, p }
    }

    /// Current estimate as a box.
    pub fn bbox(&self) -> BBox2D {
        let s = self.x[2].max(MIN_AREA);
        let r = self.x[3].max(1e-6);
        // sides below a pixel would not survive the two-decimal file format
        let w = (s * r).sqrt().max(1.0);
        let h = (s / w).max(1.0);
        BBox2D::from_center(self.x[0], self.x[1], w, h)
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.x[4], self.x[5])
    }

    pub fn predict(&mut self) {
        if self.x[2] + self.x[6] <= 0.0 {
            self.x[6] = 0.0;
        }
        let f = transition();
        self.x = f * self.x;
        self.p = f * self.p * f.transpose() + process_noise();
        self.x[2] = self.x[2].max(MIN_AREA);
    }

    pub fn update(&mut self, b: &BBox2D) {
        let h = observation();
        let r = measurement_noise();
        let y = box_to_z(b) - h * self.x;
        let s = h * self.p * h.transpose() + r;
        // s is symmetric positive definite: P is PSD and R is diagonal positive
        let s_inv = s
            .try_inverse()
            .expect("innovation covariance is invertible");
        let k = self.p * h.transpose() * s_inv;
        self.x += k * y;
        // Joseph form keeps P symmetric positive semi-definite
        let i_kh = StateCov::identity() - k * h;
        let p = i_kh * self.p * i_kh.transpose() + k * r * k.transpose();
        self.p = (p + p.transpose()) * 0.5;
        self.x[2] = self.x[2].max(MIN_AREA);
    }
}

/// One predict step followed by an update when a measurement is present.
pub fn kalman_step(state: &KalmanBoxState, measurement: Option<&BBox2D>) -> KalmanBoxState {
    let mut next = *state;
    next.predict();
    if let Some(b) = measurement {
        next.update(b);
    }
    next
}
