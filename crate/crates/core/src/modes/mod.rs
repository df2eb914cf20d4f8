//! Aperture geometry, soft-pupil eigenmode transmissivities, and spatial-mode
//! fields (input LG/HG/Gaussian, and LG modes propagated through hard
//! circular pupils).

mod fields;
mod hard_circle;

pub use fields::{gaussian_input_field, hg_input_field, lg_input_field};
pub use hard_circle::{
    lg_mode_transmissivities, lg_mode_transmissivity, lg_output_field, lg_overlap,
    lg_overlap_numeric, lg_radial_profile,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Transmit or receive pupil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aperture {
    /// Gaussian attenuation `exp(-|ρ|²/r²)`.
    SoftGaussian { radius: f64 },
    /// Hard disk of the given radius.
    HardCircle { radius: f64 },
    /// Hard square of the given side, centered on the axis.
    HardSquare { side: f64 },
}

/// Pupil family without its size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApertureShape {
    SoftGaussian,
    HardCircle,
    HardSquare,
}

impl Aperture {
    /// Pupil of the given shape whose area equals `area`.
    pub fn with_area(shape: ApertureShape, area: f64) -> Result<Self> {
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::domain(format!("aperture area {area} must be positive")));
        }
        let ap = match shape {
            ApertureShape::SoftGaussian => Aperture::SoftGaussian {
                radius: (2.0 * area / PI).sqrt(),
            },
            ApertureShape::HardCircle => Aperture::HardCircle {
                radius: (area / PI).sqrt(),
            },
            ApertureShape::HardSquare => Aperture::HardSquare { side: area.sqrt() },
        };
        Ok(ap)
    }

    pub fn shape(&self) -> ApertureShape {
        match self {
            Aperture::SoftGaussian { .. } => ApertureShape::SoftGaussian,
            Aperture::HardCircle { .. } => ApertureShape::HardCircle,
            Aperture::HardSquare { .. } => ApertureShape::HardSquare,
        }
    }

    fn dimension(&self) -> f64 {
        match *self {
            Aperture::SoftGaussian { radius } | Aperture::HardCircle { radius } => radius,
            Aperture::HardSquare { side } => side,
        }
    }

    /// `∫|A(ρ)|² d²ρ`: πr²/2 for a soft pupil, πr² for a disk, l² for a square.
    pub fn area(&self) -> f64 {
        match *self {
            Aperture::SoftGaussian { radius } => PI * radius * radius / 2.0,
            Aperture::HardCircle { radius } => PI * radius * radius,
            Aperture::HardSquare { side } => side * side,
        }
    }

    /// Side of the square with the same area.
    pub fn characteristic_length(&self) -> f64 {
        self.area().sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension();
        if d > 0.0 && d.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("aperture dimension {d} must be positive")))
        }
    }
}

/// Line-of-sight link between two pupils.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalGeometry {
    pub wavelength: f64,
    pub range: f64,
    pub tx: Aperture,
    pub rx: Aperture,
}

impl OpticalGeometry {
    pub fn new(wavelength: f64, range: f64, tx: Aperture, rx: Aperture) -> Result<Self> {
        if !(1e-7..=1e-4).contains(&wavelength) {
            return Err(Error::domain(format!(
                "wavelength {wavelength} m outside the 0.1–100 µm band"
            )));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::domain(format!("range {range} m must be positive")));
        }
        tx.validate()?;
        rx.validate()?;
        Ok(Self {
            wavelength,
            range,
            tx,
            rx,
        })
    }

    /// Same pupils at a different range.
    pub fn at_range(&self, range: f64) -> Result<Self> {
        Self::new(self.wavelength, range, self.tx, self.rx)
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Fresnel number product `A_t A_r / (λL)²`.
    pub fn fresnel_number(&self) -> f64 {
        let lambda_l = self.wavelength * self.range;
        self.tx.area() * self.rx.area() / (lambda_l * lambda_l)
    }

    pub(crate) fn tx_radius(&self) -> Result<f64> {
        match self.tx {
            Aperture::HardCircle { radius } => Ok(radius),
            other => Err(Error::domain(format!(
                "transmitter must be a hard circle, got {other:?}"
            ))),
        }
    }

    pub(crate) fn rx_radius(&self) -> Result<f64> {
        match self.rx {
            Aperture::HardCircle { radius } => Ok(radius),
            other => Err(Error::domain(format!(
                "receiver must be a hard circle, got {other:?}"
            ))),
        }
    }

    pub(crate) fn tx_side(&self) -> Result<f64> {
        match self.tx {
            Aperture::HardSquare { side } => Ok(side),
            other => Err(Error::domain(format!(
                "transmitter must be a hard square, got {other:?}"
            ))),
        }
    }

    pub(crate) fn rx_side(&self) -> Result<f64> {
        match self.rx {
            Aperture::HardSquare { side } => Ok(side),
            other => Err(Error::domain(format!(
                "receiver must be a hard square, got {other:?}"
            ))),
        }
    }
}

/// Spatial mode label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeIndex {
    /// Laguerre-Gauss, radial index `p`, azimuthal index `l`.
    Lg { p: u32, l: i32 },
    /// Hermite-Gauss, horizontal `n`, vertical `m`.
    Hg { n: u32, m: u32 },
    Gaussian,
}

impl ModeIndex {
    /// Eigenvalue index `q`: the soft-pupil transmissivity is `η_q`.
    pub fn collapsed_index(&self) -> u32 {
        match *self {
            ModeIndex::Lg { p, l } => 2 * p + l.unsigned_abs() + 1,
            ModeIndex::Hg { n, m } => n + m + 1,
            ModeIndex::Gaussian => 1,
        }
    }
}

/// Beam-width parameter `a` and mean photon number `|α|²` of each pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    pub width: f64,
    pub intensity: f64,
}

impl BeamParams {
    pub fn new(width: f64, intensity: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::domain(format!("beam width {width} m must be positive")));
        }
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(Error::domain(format!(
                "intensity {intensity} must be finite and non-negative"
            )));
        }
        Ok(Self { width, intensity })
    }
}

/// Ratio `η_{q+1}/η_q` of consecutive soft-pupil eigenvalues,
/// `(1 + 2D - √(1+4D)) / (2D)`, in a cancellation-free form.
pub fn eta_soft_base(fresnel_number: f64) -> Result<f64> {
    if !(fresnel_number > 0.0 && fresnel_number.is_finite()) {
        return Err(Error::domain(format!(
            "Fresnel number product {fresnel_number} must be positive"
        )));
    }
    let d = fresnel_number;
    Ok(2.0 * d / (1.0 + 2.0 * d + (1.0 + 4.0 * d).sqrt()))
}

/// Soft-pupil transmissivity `η_q`; there are `q` modes sharing it.
pub fn eta_soft(q: u32, fresnel_number: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::domain("collapsed mode index starts at 1"));
    }
    let base = eta_soft_base(fresnel_number)?;
    Ok(base.powi(q as i32))
}

/// Beam width of the soft-pupil eigenmodes, `r_t / (√2 (1+4D)^{1/4})`.
pub fn beam_width_soft(tx_radius: f64, fresnel_number: f64) -> Result<f64> {
    if !(tx_radius > 0.0 && tx_radius.is_finite()) {
        return Err(Error::domain(format!("radius {tx_radius} must be positive")));
    }
    if !(fresnel_number >= 0.0 && fresnel_number.is_finite()) {
        return Err(Error::domain(format!(
            "Fresnel number product {fresnel_number} must be non-negative"
        )));
    }
    Ok(tx_radius / (2f64.sqrt() * (1.0 + 4.0 * fresnel_number).powf(0.25)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soft_geometry(range: f64) -> OpticalGeometry {
        let ap = Aperture::SoftGaussian { radius: 0.1 };
        OpticalGeometry::new(1.55e-6, range, ap, ap).unwrap()
    }

    #[test]
    fn soft_fresnel_number_two_ways() {
        let g = soft_geometry(1000.0);
        let k = g.wavenumber();
        let via_radii = (k * 0.01 / (4.0 * 1000.0)) * (k * 0.01 / (4.0 * 1000.0));
        let via_areas = g.fresnel_number();
        assert!((via_radii - via_areas).abs() <= 1e-12 * via_areas);
        assert!((via_areas - 102.7).abs() < 0.05, "{via_areas}");
    }

    #[test]
    fn fresnel_number_inverse_square_in_range() {
        let a = soft_geometry(700.0).fresnel_number();
        let b = soft_geometry(2800.0).fresnel_number();
        assert!((a / 16.0 - b).abs() <= 1e-14 * b);
    }

    #[test]
    fn hard_circle_fresnel_number() {
        let ap = Aperture::HardCircle { radius: 0.07 };
        let g = OpticalGeometry::new(1.55e-6, 1000.0, ap, ap).unwrap();
        let area = PI * 0.07 * 0.07;
        let expected = area * area / (1.55e-3f64).powi(2);
        assert!((g.fresnel_number() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn equal_area_apertures() {
        let area = 0.005 * PI;
        for shape in [
            ApertureShape::SoftGaussian,
            ApertureShape::HardCircle,
            ApertureShape::HardSquare,
        ] {
            let ap = Aperture::with_area(shape, area).unwrap();
            assert!((ap.area() - area).abs() < 1e-15);
        }
        let soft = Aperture::with_area(ApertureShape::SoftGaussian, area).unwrap();
        assert_eq!(soft, Aperture::SoftGaussian { radius: 0.1 });
    }

    #[test]
    fn geometry_validation() {
        let ap = Aperture::HardSquare { side: 0.1 };
        assert!(OpticalGeometry::new(1e-3, 1000.0, ap, ap).is_err());
        assert!(OpticalGeometry::new(1.55e-6, 0.0, ap, ap).is_err());
        assert!(OpticalGeometry::new(1.55e-6, 10.0, Aperture::HardSquare { side: -1.0 }, ap).is_err());
    }

    #[test]
    fn eigenvalues_at_two() {
        for q in 1..=20 {
            let eta = eta_soft(q, 2.0).unwrap();
            assert_eq!(eta, 0.5f64.powi(q as i32));
        }
    }

    #[test]
    fn far_field_eigenvalue_tracks_fresnel_number() {
        // base = D - 2D² + O(D³)
        let d = 1e-4;
        let eta = eta_soft(1, d).unwrap();
        assert!((eta - (d - 2.0 * d * d)).abs() < 1e-11);
    }

    #[test]
    fn near_field_eigenvalue() {
        let d = soft_geometry(1000.0).fresnel_number();
        let direct = (1.0 + 2.0 * d - (1.0 + 4.0 * d).sqrt()) / (2.0 * d);
        let eta = eta_soft(1, d).unwrap();
        assert!((eta - direct).abs() < 1e-13);
        assert!((eta - 0.906).abs() < 1e-3);
    }

    #[test]
    fn eigenvalue_domain() {
        assert!(eta_soft(1, 0.0).is_err());
        assert!(eta_soft(1, -1.0).is_err());
        assert!(eta_soft(0, 1.0).is_err());
    }

    #[test]
    fn soft_beam_width() {
        assert_eq!(beam_width_soft(0.1, 0.0).unwrap(), 0.1 / 2f64.sqrt());
        let a = beam_width_soft(0.1, 2.0).unwrap();
        assert!((a - 0.1 / (2f64.sqrt() * 3f64.sqrt())).abs() < 1e-16);
        let d = 102.7;
        let a = beam_width_soft(0.1, d).unwrap();
        assert!((a - 0.1 / (2f64.sqrt() * (1.0 + 4.0 * d).powf(0.25))).abs() < 1e-17);
    }

    #[test]
    fn collapsed_indices() {
        assert_eq!(ModeIndex::Lg { p: 1, l: -3 }.collapsed_index(), 6);
        assert_eq!(ModeIndex::Hg { n: 2, m: 1 }.collapsed_index(), 4);
        assert_eq!(ModeIndex::Gaussian.collapsed_index(), 1);
    }

    use proptest::prelude::*;
    proptest! {
        #[test]
        fn base_in_unit_interval_and_geometric(d in 1e-6f64..1e6, q in 1u32..60) {
            let b = eta_soft_base(d).unwrap();
            prop_assert!(b > 0.0 && b < 1.0);
            let ratio = eta_soft(q + 1, d).unwrap() / eta_soft(q, d).unwrap();
            prop_assert!((ratio - b).abs() <= 1e-13 * b);
        }
    }
}
