//! Benefit regions: the designs whose cost does not exceed the no-spring
//! cost, `{x : xᵀQx + 2qᵀx ≤ 0}`. For nonsingular `Q` this is the ellipse
//! `(x − x_c)ᵀ P⁻¹ (x − x_c) ≤ 1` with `x_c = −Q⁻¹q` and `P = Q⁻¹ (qᵀQ⁻¹q)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::actuator::DesignPoint;
use crate::error::{Error, Result};
use crate::linalg::{dot, inverse, mat_vec, scale, sqrt_psd, Mat2, SymEigen};
use crate::quadratic::QuadraticObjective;
use crate::scalar::Scalar;

/// `Q` is treated as rank-deficient above this condition number.
pub const DEGENERACY_CONDITION: f64 = 1e12;
/// Boundary equality slack, relative to `|c| + 1`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    /// Proper ellipse with nonempty interior.
    Full,
    /// Singular `Q`; the region is a strip or unbounded and only described
    /// implicitly by the quadratic.
    RankDeficient,
    /// `q = 0` with `Q ≻ 0`: the origin is the only beneficial design.
    Point,
}

impl Degeneracy {
    pub fn as_str(self) -> &'static str {
        match self {
            Degeneracy::Full => "full",
            Degeneracy::RankDeficient => "rank-deficient",
            Degeneracy::Point => "point",
        }
    }
}

mod opt_row_major {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize + Copy, S: Serializer>(m: &Option<[[T; 2]; 2]>, s: S) -> Result<S::Ok, S::Error> {
        m.map(|m| [m[0][0], m[0][1], m[1][0], m[1][1]]).serialize(s)
    }

    pub fn deserialize<'de, T: Deserialize<'de> + Copy, D: Deserializer<'de>>(d: D) -> Result<Option<[[T; 2]; 2]>, D::Error> {
        Ok(Option::<[T; 4]>::deserialize(d)?.map(|v| [[v[0], v[1]], [v[2], v[3]]]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitRegion<T: Copy> {
    pub center: Option<DesignPoint<T>>,
    /// Shape matrix `P`, row-major.
    #[serde(with = "opt_row_major")]
    pub shape: Option<Mat2<T>>,
    pub degeneracy: Degeneracy,
    pub source_task: String,
}

pub fn benefit_region<T: Scalar>(obj: &QuadraticObjective<T>) -> BenefitRegion<T> {
    let eig = SymEigen::new(&obj.matrix);
    let rank_deficient = BenefitRegion {
        center: None,
        shape: None,
        degeneracy: Degeneracy::RankDeficient,
        source_task: obj.task_name.clone(),
    };
    if !(eig.condition_number() <= T::lit(DEGENERACY_CONDITION)) {
        return rank_deficient;
    }
    let Some(inv) = inverse(&obj.matrix) else {
        return rank_deficient;
    };
    let zero = T::zero();
    if obj.vector == [zero, zero] {
        return BenefitRegion {
            center: Some(DesignPoint::origin()),
            shape: Some([[zero; 2]; 2]),
            degeneracy: Degeneracy::Point,
            source_task: obj.task_name.clone(),
        };
    }
    let w = mat_vec(&inv, &obj.vector);
    let level = dot(&obj.vector, &w);
    BenefitRegion {
        center: Some(DesignPoint::new(-w[0], -w[1])),
        shape: Some(scale(&inv, level)),
        degeneracy: Degeneracy::Full,
        source_task: obj.task_name.clone(),
    }
}

/// Exact membership test on the quadratic itself.
pub fn contains<T: Scalar>(obj: &QuadraticObjective<T>, x: &DesignPoint<T>) -> bool {
    obj.excess(x) <= T::zero()
}

/// Membership with the boundary slack `rel_tol · (|c| + 1)`.
pub fn contains_within<T: Scalar>(obj: &QuadraticObjective<T>, x: &DesignPoint<T>, rel_tol: T) -> bool {
    obj.excess(x) <= rel_tol * (obj.constant.abs() + T::one())
}

/// `n` points `x_c + P^{1/2} (cos θ_k, sin θ_k)`, `θ_k = 2πk/n`.
pub fn boundary_points<T: Scalar>(region: &BenefitRegion<T>, n: usize) -> Result<Vec<DesignPoint<T>>> {
    let (Degeneracy::Full, Some(center), Some(shape)) = (region.degeneracy, region.center, region.shape) else {
        return Err(Error::DegenerateRegion(region.degeneracy.as_str().into()));
    };
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 boundary points, got {n}")));
    }
    let root = sqrt_psd(&shape);
    let step = T::lit(2.0 * std::f64::consts::PI) / T::from_count(n);
    Ok((0..n)
        .map(|k| {
            let (s, c) = (step * T::from_count(k)).sin_cos();
            let d = mat_vec(&root, &[c, s]);
            DesignPoint::new(center.k_p + d[0], center.tau_p + d[1])
        })
        .collect())
}

/// Ellipse-form membership `(x − x_c)ᵀ P⁻¹ (x − x_c) ≤ 1 + slack`, for
/// cross-checking against [`contains`].
pub fn contains_via_shape<T: Scalar>(region: &BenefitRegion<T>, x: &DesignPoint<T>, slack: T) -> Option<bool> {
    let (Degeneracy::Full, Some(c), Some(p)) = (region.degeneracy, region.center, region.shape) else {
        return None;
    };
    let inv = inverse(&p)?;
    let d = [x.k_p - c.k_p, x.tau_p - c.tau_p];
    Some(dot(&d, &mat_vec(&inv, &d)) <= T::one() + slack)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMembership<T> {
    pub task: String,
    pub contains: bool,
    /// `f(x) − f(0)`.
    pub excess: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport<T: Copy> {
    pub x: DesignPoint<T>,
    pub tasks: Vec<TaskMembership<T>>,
    pub all: bool,
}

pub fn common_benefit<T: Scalar>(objs: &[QuadraticObjective<T>], x: &DesignPoint<T>) -> MembershipReport<T> {
    let tasks: Vec<TaskMembership<T>> = objs
        .iter()
        .map(|o| TaskMembership {
            task: o.task_name.clone(),
            contains: contains(o, x),
            excess: o.excess(x),
        })
        .collect();
    let all = tasks.iter().all(|m| m.contains);
    MembershipReport { x: *x, tasks, all }
}

/// Region plus its sampled boundary, the form written to `regions.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionExport<T: Copy> {
    pub center: Option<DesignPoint<T>>,
    #[serde(with = "opt_row_major")]
    pub shape: Option<Mat2<T>>,
    pub degeneracy: Degeneracy,
    pub source_task: String,
    pub boundary: Vec<DesignPoint<T>>,
}

pub fn export_region<T: Scalar>(obj: &QuadraticObjective<T>, n: usize) -> RegionExport<T> {
    let region = benefit_region(obj);
    let boundary = boundary_points(&region, n).unwrap_or_default();
    RegionExport {
        center: region.center,
        shape: region.shape,
        degeneracy: region.degeneracy,
        source_task: region.source_task,
        boundary,
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Static plot of region boundaries and labelled markers in the
/// stiffness–preload plane, auto-scaled to the content.
pub fn render_svg<T: Scalar>(regions: &[RegionExport<T>], markers: &[(String, DesignPoint<T>)]) -> String {
    let (width, height, margin) = (640.0_f64, 480.0_f64, 60.0_f64);
    let to_f = |v: T| v.to_f64().unwrap_or(0.0);
    let mut xs = vec![0.0_f64];
    let mut ys = vec![0.0_f64];
    for r in regions {
        for p in &r.boundary {
            xs.push(to_f(p.k_p));
            ys.push(to_f(p.tau_p));
        }
    }
    for (_, p) in markers {
        xs.push(to_f(p.k_p));
        ys.push(to_f(p.tau_p));
    }
    let bounds = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = ((hi - lo) * 0.1).max(1e-9);
        (lo - pad, hi + pad)
    };
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| margin + (x - x0) / (x1 - x0) * (width - 2.0 * margin);
    let py = |y: f64| height - margin - (y - y0) / (y1 - y0) * (height - 2.0 * margin);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{margin}" y="{margin}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        width - 2.0 * margin,
        height - 2.0 * margin
    );
    if x0 < 0.0 && x1 > 0.0 {
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{margin}" x2="{0:.2}" y2="{1}" stroke="#bbbbbb"/>"##,
            px(0.0),
            height - margin
        );
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            svg,
            r##"<line x1="{margin}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#bbbbbb"/>"##,
            py(0.0),
            width - margin
        );
    }
    for (tick, label) in [(x0, x0), (x1, x1)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="middle">{:.3}</text>"#,
            px(tick),
            height - margin + 15.0,
            label
        );
    }
    for (tick, label) in [(y0, y0), (y1, y1)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{:.3}</text>"#,
            margin - 5.0,
            py(tick),
            label
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">Parallel stiffness (N·m/rad)</text>"#,
        width / 2.0,
        height - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {})">Preload (N·m)</text>"#,
        height / 2.0,
        height / 2.0
    );
    for (k, r) in regions.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if r.boundary.is_empty() {
            continue;
        }
        let pts: Vec<String> = r
            .boundary
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(to_f(p.k_p)), py(to_f(p.tau_p))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.12" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            width - margin + 5.0 - 120.0,
            margin + 15.0 + 15.0 * k as f64,
            escape(&r.source_task)
        );
    }
    let _ = writeln!(
        svg,
        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#,
        px(0.0),
        py(0.0)
    );
    for (label, p) in markers {
        let (cx, cy) = (px(to_f(p.k_p)), py(to_f(p.tau_p)));
        let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="none" stroke="black"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            cx + 6.0,
            cy - 6.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
