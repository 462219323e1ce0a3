//! Discretized wavefront and the operations that close the Hamiltonian
//! system: the transverse amplitude Laplacian ratio, the regime-specific
//! wave potential, its gradient along the front, and flux-conserving
//! amplitude transport between fronts.

use crate::error::{Result, SimError};
use crate::exec::{map_indexed, Exec};
use crate::units::{RegimeKind, UnitSystem};

/// Relative amplitude floor: rays with R below `AMPLITUDE_FLOOR * max(R)`
/// carry negligible intensity and get their wave potential copied from the
/// nearest un-floored ray.
pub const AMPLITUDE_FLOOR: f64 = 1e-8;

/// One ray of a front: position, momentum (wave vector in the optics
/// regime, scaled by hbar), carried amplitude and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayState {
    pub x: f64,
    pub z: f64,
    pub px: f64,
    pub pz: f64,
    /// Real wave amplitude carried by the ray, >= 0.
    pub r_amp: f64,
    /// Last-evaluated wave potential at the ray.
    pub q: f64,
    /// Last-evaluated Hamiltonian value at the ray.
    pub h: f64,
}

impl RayState {
    pub fn p_norm(&self) -> f64 {
        self.px.hypot(self.pz)
    }
}

/// Ordered rays at equal time, the unit on which Q/W is computed.
#[derive(Debug, Clone)]
pub struct Wavefront {
    pub rays: Vec<RayState>,
    pub t: f64,
}

/// Per-ray real values aligned with a front's ray ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontScalars {
    pub values: Vec<f64>,
}

impl Wavefront {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Transverse arclength coordinate along the front polyline, measured
    /// from the first ray.
    pub fn arclength(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.rays.len());
        let mut acc = 0.0;
        s.push(0.0);
        for w in self.rays.windows(2) {
            acc += (w[1].x - w[0].x).hypot(w[1].z - w[0].z);
            s.push(acc);
        }
        s
    }

    /// Checks that the ray ordering along the front chord is preserved.
    /// A non-positive projection means adjacent rays crossed (caustic).
    pub fn check_ordering(&self) -> Result<()> {
        let n = self.rays.len();
        if n < 2 {
            return Err(SimError::DegenerateFront("fewer than 2 rays".into()));
        }
        let (first, last) = (self.rays[0], self.rays[n - 1]);
        let (cx, cz) = (last.x - first.x, last.z - first.z);
        let chord = cx.hypot(cz);
        if chord <= 0.0 {
            return Err(SimError::DegenerateFront("front chord has zero length".into()));
        }
        for i in 0..n - 1 {
            let proj = (self.rays[i + 1].x - self.rays[i].x) * cx
                + (self.rays[i + 1].z - self.rays[i].z) * cz;
            if proj <= 0.0 {
                return Err(SimError::Caustic {
                    left: i,
                    right: i + 1,
                    t: self.t,
                });
            }
        }
        Ok(())
    }

    /// Per-ray tube width: mean of the adjacent gaps, half-gap at the edges.
    pub fn tube_widths(&self) -> Vec<f64> {
        tube_widths_from_s(&self.arclength())
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.rays.iter().map(|r| r.r_amp).collect()
    }
}

pub fn tube_widths_from_s(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    w[0] = 0.5 * (s[1] - s[0]);
    w[n - 1] = 0.5 * (s[n - 1] - s[n - 2]);
    for i in 1..n - 1 {
        w[i] = 0.5 * (s[i + 1] - s[i - 1]);
    }
    w
}

/// Fornberg finite-difference weights on arbitrary nodes.
///
/// Returns `c[k][j]`: the weight of node `j` in the k-th derivative at `z`,
/// for k = 0..=m.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0f64; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

fn dot(w: &[f64], f: &[f64]) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// Transverse Laplacian ratio of a sampled amplitude profile via the
/// log-amplitude identity `lap(R)/R = u'' + (u')^2` with `u = ln R`.
///
/// `floored[i]` marks rays at the amplitude floor whose value was copied
/// from the nearest un-floored ray.
pub fn log_amplitude_laplacian(s: &[f64], r: &[f64], exec: Exec) -> Result<(Vec<f64>, Vec<bool>)> {
    let n = s.len();
    assert_eq!(n, r.len());
    if n < 5 {
        return Err(SimError::DegenerateFront(format!(
            "laplacian ratio needs >= 5 rays, got {n}"
        )));
    }
    let r_max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(SimError::DegenerateFront(format!(
            "max amplitude {r_max} is not positive and finite"
        )));
    }
    for w in s.windows(2) {
        if w[1] - w[0] <= 0.0 {
            return Err(SimError::DegenerateFront(
                "arclength coordinate is not strictly increasing".into(),
            ));
        }
    }
    let floor = AMPLITUDE_FLOOR * r_max;
    let floored: Vec<bool> = r.iter().map(|&v| v <= floor).collect();
    if floored.iter().all(|&f| f) {
        return Err(SimError::DegenerateFront(
            "all rays at the amplitude floor".into(),
        ));
    }
    let r_cl: Vec<f64> = r.iter().map(|&v| v.max(floor)).collect();

    let mut lap = map_indexed(exec, n, |i| {
        // 4-point one-sided stencil at the edges (second order for u''),
        // centered 3-point stencil in the interior. The stencils are
        // applied to ln(R_j / R_i) rather than ln R_j: derivative weights
        // annihilate constants, and the delta form avoids the large
        // cancellations of differencing ln R directly.
        let (lo, hi) = if i == 0 {
            (0, 4.min(n))
        } else if i == n - 1 {
            (n - 4, n)
        } else {
            (i - 1, i + 2)
        };
        let w = fd_weights(s[i], &s[lo..hi], 2);
        let mut du = 0.0;
        let mut ddu = 0.0;
        for (k, j) in (lo..hi).enumerate() {
            let lr = (r_cl[j] / r_cl[i]).ln();
            du += w[1][k] * lr;
            ddu += w[2][k] * lr;
        }
        ddu + du * du
    });

    // Floored rays: copy from the nearest un-floored ray.
    for i in 0..n {
        if floored[i] {
            let mut best = usize::MAX;
            let mut dist = usize::MAX;
            for j in 0..n {
                if !floored[j] {
                    let d = i.abs_diff(j);
                    if d < dist {
                        dist = d;
                        best = j;
                    }
                }
            }
            lap[i] = lap[best];
        }
    }
    Ok((lap, floored))
}

/// Per-ray estimate of `lap(R)/R` along the front.
pub fn laplacian_ratio(front: &Wavefront, exec: Exec) -> Result<FrontScalars> {
    let s = front.arclength();
    let r = front.amplitudes();
    let (values, _) = log_amplitude_laplacian(&s, &r, exec)?;
    Ok(FrontScalars { values })
}

/// Factor turning `lap(R)/R` into the regime's wave potential.
pub fn wave_potential_factor(u: &UnitSystem, regime: RegimeKind) -> f64 {
    match regime {
        // W = -(c / 2 k0) lap(R)/R
        RegimeKind::Optics => -u.c / (2.0 * u.k0()),
        // Q = -(hbar^2 / 2m) lap(R)/R
        RegimeKind::NonRelativistic => -u.hbar * u.hbar / (2.0 * u.mass),
        // Q = -(hbar^2 c^2 / 2E) lap(R)/R
        RegimeKind::Relativistic => -u.hbar * u.hbar * u.c * u.c / (2.0 * u.energy),
    }
}

/// Computes the regime's wave potential on the front and stores it back
/// into each ray's `q`.
pub fn wave_potential(
    front: &mut Wavefront,
    u: &UnitSystem,
    regime: RegimeKind,
    exec: Exec,
) -> Result<FrontScalars> {
    let lap = laplacian_ratio(front, exec)?;
    let factor = wave_potential_factor(u, regime);
    let values: Vec<f64> = lap.values.iter().map(|&l| factor * l).collect();
    for (ray, &q) in front.rays.iter_mut().zip(&values) {
        ray.q = q;
    }
    Ok(FrontScalars { values })
}

/// d f / d s along the front: centered non-uniform stencil in the interior,
/// one-sided at the edges.
pub fn transverse_gradient_on(s: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = s.len();
    assert_eq!(n, f.len());
    if n < 3 {
        return Err(SimError::DegenerateFront(format!(
            "transverse gradient needs >= 3 rays, got {n}"
        )));
    }
    for w in s.windows(2) {
        if w[1] - w[0] <= 0.0 {
            return Err(SimError::DegenerateFront(
                "duplicate arclength values (zero spacing)".into(),
            ));
        }
    }
    let mut g = vec![0.0; n];
    for i in 0..n {
        let (lo, hi) = if i == 0 {
            (0, 3)
        } else if i == n - 1 {
            (n - 3, n)
        } else {
            (i - 1, i + 2)
        };
        let w = fd_weights(s[i], &s[lo..hi], 1);
        g[i] = dot(&w[1], &f[lo..hi]);
    }
    Ok(g)
}

pub fn transverse_gradient(front: &Wavefront, f: &FrontScalars) -> Result<FrontScalars> {
    let s = front.arclength();
    Ok(FrontScalars {
        values: transverse_gradient_on(&s, &f.values)?,
    })
}

/// Flux-conserving amplitude transport between two fronts with identical
/// ray count and ordering: per tube, `R^2 |p| ds` is carried over.
pub fn transport_amplitude(front_prev: &Wavefront, front_next: &Wavefront) -> Result<FrontScalars> {
    let n = front_prev.len();
    if n != front_next.len() {
        return Err(SimError::DegenerateFront(format!(
            "transport between fronts of different ray counts ({n} vs {})",
            front_next.len()
        )));
    }
    front_next.check_ordering()?;
    let ds_prev = front_prev.tube_widths();
    let ds_next = front_next.tube_widths();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let flux = front_prev.rays[i].r_amp * front_prev.rays[i].r_amp
            * front_prev.rays[i].p_norm()
            * ds_prev[i];
        let denom = front_next.rays[i].p_norm() * ds_next[i];
        if denom <= 0.0 {
            return Err(SimError::Caustic {
                left: i.saturating_sub(1),
                right: i,
                t: front_next.t,
            });
        }
        values.push((flux / denom).sqrt());
    }
    Ok(FrontScalars { values })
}

/// Total flux `sum R^2 |p| ds` over a front.
pub fn total_flux(front: &Wavefront) -> f64 {
    let ds = front.tube_widths();
    front
        .rays
        .iter()
        .zip(&ds)
        .map(|(r, &w)| r.r_amp * r.r_amp * r.p_norm() * w)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::make_unit_system;

    fn flat_front(xs: &[f64], r: &[f64], pz: f64) -> Wavefront {
        Wavefront {
            rays: xs
                .iter()
                .zip(r)
                .map(|(&x, &amp)| RayState {
                    x,
                    z: 0.0,
                    px: 0.0,
                    pz,
                    r_amp: amp,
                    q: 0.0,
                    h: 0.0,
                })
                .collect(),
            t: 0.0,
        }
    }

    fn grid(n: usize, half: f64) -> Vec<f64> {
        (0..n)
            .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let xs = grid(11, 4.0);
        let r = vec![0.7; 11];
        let f = flat_front(&xs, &r, 1.0);
        let lap = laplacian_ratio(&f, Exec::Sequential).unwrap();
        for v in lap.values {
            assert!(v.abs() < 1e-12, "got {v}");
        }
    }

    #[test]
    fn laplacian_of_gaussian_is_exact_in_log_space() {
        // R = exp(-s^2): ln R is quadratic, so the stencils are exact and
        // lap(R)/R = -2 + 4 s^2 to machine precision.
        let xs = grid(201, 4.0);
        let r: Vec<f64> = xs.iter().map(|&x| (-x * x).exp()).collect();
        let f = flat_front(&xs, &r, 1.0);
        let lap = laplacian_ratio(&f, Exec::Sequential).unwrap();
        for (&x, &v) in xs.iter().zip(&lap.values) {
            let exact = -2.0 + 4.0 * x * x;
            assert!((v - exact).abs() < 1e-9, "x={x}: {v} vs {exact}");
        }
        // value at the axis
        assert!((lap.values[100] - (-2.0)).abs() < 1e-10);
    }

    #[test]
    fn laplacian_of_cosine_matches_analytic() {
        // lap(R)/R = -kappa^2 for R = cos(kappa s); max relative error
        // <= 1e-4 for 201 rays spanning +-4 w0.
        let kappa = 0.1;
        let xs = grid(201, 4.0);
        let r: Vec<f64> = xs.iter().map(|&x| (kappa * x).cos()).collect();
        let f = flat_front(&xs, &r, 1.0);
        let lap = laplacian_ratio(&f, Exec::Sequential).unwrap();
        for (&x, &v) in xs.iter().zip(&lap.values) {
            let rel = (v - (-kappa * kappa)).abs() / (kappa * kappa);
            assert!(rel <= 1e-4, "x={x}: rel err {rel}");
        }
    }

    #[test]
    fn laplacian_requires_five_rays() {
        let xs = grid(4, 1.0);
        let f = flat_front(&xs, &[1.0; 4], 1.0);
        assert!(laplacian_ratio(&f, Exec::Sequential).is_err());
    }

    #[test]
    fn floored_rays_copy_nearest_value() {
        let xs = grid(9, 4.0);
        let mut r: Vec<f64> = xs.iter().map(|&x| (-x * x).exp()).collect();
        r[0] = 1e-12; // below floor relative to max 1
        r[8] = 0.0;
        let f = flat_front(&xs, &r, 1.0);
        let lap = laplacian_ratio(&f, Exec::Sequential).unwrap();
        assert_eq!(lap.values[0], lap.values[1]);
        assert_eq!(lap.values[8], lap.values[7]);
    }

    #[test]
    fn wave_potential_values() {
        let u_nr = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        let xs = grid(201, 4.0);
        let r: Vec<f64> = xs.iter().map(|&x| (-x * x).exp()).collect();
        let mut f = flat_front(&xs, &r, u_nr.p0);
        let q = wave_potential(&mut f, &u_nr, RegimeKind::NonRelativistic, Exec::Sequential)
            .unwrap();
        // Q(0) = +hbar^2 / (m w0^2) = 1
        assert!((q.values[100] - 1.0).abs() < 1e-10);
        assert_eq!(f.rays[100].q, q.values[100]);

        let u_opt = make_unit_system(2e-4, RegimeKind::Optics, None).unwrap();
        let mut f = flat_front(&xs, &r, u_opt.p0);
        let w = wave_potential(&mut f, &u_opt, RegimeKind::Optics, Exec::Sequential).unwrap();
        // W(0) = c / (k0 w0^2)
        let expect = u_opt.c / u_opt.k0();
        assert!((w.values[100] - expect).abs() < 1e-10 * expect.abs().max(1.0));
    }

    #[test]
    fn wave_potential_mirror_symmetry() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        let xs = grid(201, 4.0);
        let r: Vec<f64> = xs.iter().map(|&x| (-x * x).exp() + 0.1 * (0.5 * x).cos()).collect();
        let mut f = flat_front(&xs, &r, u.p0);
        let q = wave_potential(&mut f, &u, RegimeKind::NonRelativistic, Exec::Sequential).unwrap();
        let n = q.values.len();
        for i in 0..n {
            assert!(
                (q.values[i] - q.values[n - 1 - i]).abs() <= 1e-10,
                "asymmetry at {i}"
            );
        }
    }

    #[test]
    fn gradient_of_constant_and_linear() {
        let s = grid(11, 1.0);
        let g = transverse_gradient_on(&s, &vec![3.0; 11]).unwrap();
        for v in &g {
            assert!(v.abs() < 1e-12);
        }
        let f: Vec<f64> = s.clone();
        let g = transverse_gradient_on(&s, &f).unwrap();
        for v in &g {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_exact_for_quadratics() {
        // f = s^2 at s = 1 with spacing 0.1 -> 2.0 within 1e-12
        let s: Vec<f64> = (0..21).map(|i| i as f64 * 0.1).collect();
        let f: Vec<f64> = s.iter().map(|&v| v * v).collect();
        let g = transverse_gradient_on(&s, &f).unwrap();
        assert!((g[10] - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn gradient_rejects_duplicate_s() {
        let s = vec![0.0, 0.0, 1.0];
        assert!(transverse_gradient_on(&s, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn transport_identity_and_scaling() {
        let xs = grid(7, 3.0);
        let r: Vec<f64> = xs.iter().map(|&x| (-x * x).exp()).collect();
        let prev = flat_front(&xs, &r, 2.0);

        // identical geometry and momentum: R unchanged
        let next = prev.clone();
        let out = transport_amplitude(&prev, &next).unwrap();
        for (a, b) in out.values.iter().zip(&r) {
            assert!((a - b).abs() < 1e-14);
        }

        // ds doubled, |p| constant: R -> R / sqrt(2)
        let xs2: Vec<f64> = xs.iter().map(|&x| 2.0 * x).collect();
        let next = flat_front(&xs2, &r, 2.0);
        let out = transport_amplitude(&prev, &next).unwrap();
        for (a, b) in out.values.iter().zip(&r) {
            assert!((a - b / 2f64.sqrt()).abs() < 1e-14);
        }

        // |p| doubled, ds constant: R -> R / sqrt(2)
        let next = flat_front(&xs, &r, 4.0);
        let out = transport_amplitude(&prev, &next).unwrap();
        for (a, b) in out.values.iter().zip(&r) {
            assert!((a - b / 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn transport_detects_crossing() {
        let xs = grid(5, 2.0);
        let r = vec![1.0; 5];
        let prev = flat_front(&xs, &r, 1.0);
        let mut crossed = xs.clone();
        crossed.swap(1, 2);
        let next = flat_front(&crossed, &r, 1.0);
        match transport_amplitude(&prev, &next) {
            Err(SimError::Caustic { .. }) => {}
            other => panic!("expected caustic, got {other:?}"),
        }
    }

    #[test]
    fn parallel_and_sequential_paths_agree() {
        let xs = grid(5000, 4.0);
        let r: Vec<f64> = xs.iter().map(|&x| (-x * x / 4.0).exp()).collect();
        let f = flat_front(&xs, &r, 1.0);
        let a = laplacian_ratio(&f, Exec::Sequential).unwrap();
        let b = laplacian_ratio(&f, Exec::Parallel).unwrap();
        assert_eq!(a.values, b.values);
    }
}
