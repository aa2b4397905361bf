//! Writes the synthetic N₂-like dataset shipped in `data/n2_synthetic.toml`.
//!
//! Ground manifold X: ν = 0 with J = 0..=23 and ν = 1 with J = 0..=4, every M.
//! Six excited singlet manifolds with ν' = 0, 1 and J' = 0..=24. Dipoles are
//! μ_el(label) · f(ν, ν') · h(J, M → J', M) with the z-polarized Hönl–London
//! style direction cosine h, then scaled by one global factor chosen so the
//! default two-color field gives wells with a quarter period near 0.625 μs for
//! √0.2|0,0,0⟩ + √0.8|0,2,0⟩.
//!
//! Self-contained on purpose: the library embeds the generated file, so the
//! generator cannot depend on it.
//!
//! Usage: `cargo run -p moldep-core --example generate_n2_dataset [OUT]`

use std::f64::consts::PI;
use std::fmt::Write as _;

const C: f64 = 299_792_458.0;
const H: f64 = 6.626_070_15e-34;
const HBAR: f64 = H / (2.0 * PI);
const AMU: f64 = 1.660_539_066_60e-27;
const DEBYE: f64 = 1.0e-21 / C;

const MASS_U: f64 = 28.0134;
const B_X: f64 = 1.9896;
const OMEGA_X: f64 = 2324.66;
const J_MAX_V0: u32 = 23;
const J_MAX_V1: u32 = 4;
const J_MAX_EXCITED: u32 = 24;

const LAMBDA2: f64 = 0.736e-6;
const E2: f64 = 1.0e8;
const TARGET_QUARTER_PERIOD: f64 = 0.625e-6;

struct Manifold {
    label: &'static str,
    t_e: f64,
    omega: f64,
    b: f64,
    mu_el: f64,
}

const MANIFOLDS: [Manifold; 6] = [
    Manifold { label: "b1Pu", t_e: 101_455.0, omega: 628.0, b: 1.42, mu_el: 0.60 },
    Manifold { label: "cp1Su", t_e: 104_420.0, omega: 2_200.0, b: 1.93, mu_el: 1.20 },
    Manifold { label: "c1Pu", t_e: 104_142.0, omega: 2_180.0, b: 1.95, mu_el: 0.80 },
    Manifold { label: "o1Pu", t_e: 105_700.0, omega: 1_700.0, b: 1.60, mu_el: 0.40 },
    Manifold { label: "bp1Su", t_e: 103_690.0, omega: 750.0, b: 1.15, mu_el: 1.00 },
    Manifold { label: "ep1Su", t_e: 115_850.0, omega: 2_100.0, b: 1.90, mu_el: 0.30 },
];

/// Signed vibrational overlap amplitudes f(ν, ν').
const OVERLAP: [[f64; 2]; 2] = [[0.78, 0.52], [-0.55, 0.62]];

struct State {
    id: String,
    label: &'static str,
    nu: u32,
    j: u32,
    m: i32,
    energy: f64,
}

fn ground_energy(nu: u32, j: u32) -> f64 {
    OMEGA_X * nu as f64 + B_X * (j * (j + 1)) as f64
}

fn excited_energy(m: &Manifold, nu: u32, j: u32) -> f64 {
    m.t_e + m.omega * nu as f64 + m.b * (j * (j + 1)) as f64
}

fn direction_cosine(j: u32, m: i32, jp: u32) -> f64 {
    let (j, m2) = (j as f64, (m * m) as f64);
    if jp as f64 == j + 1.0 {
        (((j + 1.0) * (j + 1.0) - m2) / ((2.0 * j + 1.0) * (2.0 * j + 3.0))).sqrt()
    } else {
        ((j * j - m2) / ((2.0 * j - 1.0) * (2.0 * j + 1.0))).sqrt()
    }
}

fn state_id(label: &str, nu: u32, j: u32, m: i32) -> String {
    format!("{label}_v{nu}_J{j}_M{m}")
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/n2_synthetic.toml").into());

    let mut states = Vec::new();
    for (nu, jmax) in [(0u32, J_MAX_V0), (1, J_MAX_V1)] {
        for j in 0..=jmax {
            for m in -(j as i32)..=j as i32 {
                states.push(State {
                    id: state_id("X", nu, j, m),
                    label: "X",
                    nu,
                    j,
                    m,
                    energy: ground_energy(nu, j),
                });
            }
        }
    }
    for man in &MANIFOLDS {
        for nu in 0..2 {
            for j in 0..=J_MAX_EXCITED {
                for m in -(j as i32)..=j as i32 {
                    if m.unsigned_abs() > J_MAX_V0 {
                        continue;
                    }
                    states.push(State {
                        id: state_id(man.label, nu, j, m),
                        label: man.label,
                        nu,
                        j,
                        m,
                        energy: excited_energy(man, nu, j),
                    });
                }
            }
        }
    }

    // Unscaled dipoles (debye), one per allowed ground/excited pair.
    let mut dipoles: Vec<(String, String, f64)> = Vec::new();
    for g in states.iter().filter(|s| s.label == "X") {
        for man in &MANIFOLDS {
            for nup in 0..2u32 {
                for jp in [g.j.wrapping_sub(1), g.j + 1] {
                    if jp > J_MAX_EXCITED || jp < g.m.unsigned_abs() || jp == u32::MAX {
                        continue;
                    }
                    let h = direction_cosine(g.j, g.m, jp);
                    if h == 0.0 {
                        continue;
                    }
                    let value = man.mu_el * OVERLAP[g.nu as usize][nup as usize] * h;
                    dipoles.push((g.id.clone(), state_id(man.label, nup, jp, g.m), value));
                }
            }
        }
    }

    // χⁿⁱ(ω₂) of √0.2|0,0,0⟩ + √0.8|0,2,0⟩ with unit scale.
    let omega2 = 2.0 * PI * C / LAMBDA2;
    let to_rad = 2.0 * PI * C * 100.0;
    let chi_of = |ground: &str| -> f64 {
        let g = states.iter().find(|s| s.id == ground).unwrap();
        dipoles
            .iter()
            .filter(|(a, _, _)| a == ground)
            .map(|(_, b, d)| {
                let e = states.iter().find(|s| &s.id == b).unwrap();
                let w = (e.energy - g.energy) * to_rad;
                let mu = d * DEBYE;
                mu * mu * (1.0 / (w + omega2) + 1.0 / (w - omega2))
            })
            .sum::<f64>()
            / HBAR
    };
    let chi_unit = 0.2 * chi_of(&state_id("X", 0, 0, 0)) + 0.8 * chi_of(&state_id("X", 0, 2, 0));

    // T/4 = t  ⇒  V₀ = m(2π/T)²/(2k₂²) with V₀ = 8E₂²χ.
    let mass = MASS_U * AMU;
    let period = 4.0 * TARGET_QUARTER_PERIOD;
    let k2 = 2.0 * PI / LAMBDA2;
    let v0 = mass * (2.0 * PI / period).powi(2) / (2.0 * k2 * k2);
    let chi_target = v0 / (8.0 * E2 * E2);
    let scale = (chi_target / chi_unit).sqrt();

    let mut doc = String::new();
    writeln!(doc, "# Synthetic N2-like model. Generated by examples/generate_n2_dataset.rs.").unwrap();
    writeln!(doc, "# Energies in cm-1, dipoles in debye (global scale {scale:.6e}).").unwrap();
    writeln!(doc, "# Ground X: nu=0 J<={J_MAX_V0}, nu=1 J<={J_MAX_V1}; six excited manifolds nu'<=1 J'<={J_MAX_EXCITED}.").unwrap();
    writeln!(doc).unwrap();
    writeln!(doc, "[meta]").unwrap();
    writeln!(doc, "name = \"synthetic N2\"").unwrap();
    writeln!(doc, "mass = {{ value = {MASS_U}, unit = \"u\" }}").unwrap();
    writeln!(doc, "rotational_constant = {{ value = {B_X}, unit = \"cm-1\" }}").unwrap();
    writeln!(doc, "ground_label = \"X\"").unwrap();
    let rules: Vec<String> = std::iter::once("X")
        .chain(MANIFOLDS.iter().map(|m| m.label))
        .map(|l| format!("{l} = \"(-1)^J\""))
        .collect();
    writeln!(doc, "parity = {{ {} }}", rules.join(", ")).unwrap();
    writeln!(doc).unwrap();
    writeln!(doc, "[states]").unwrap();
    writeln!(doc, "records = [").unwrap();
    for s in &states {
        writeln!(
            doc,
            "  {{ id = \"{}\", label = \"{}\", nu = {}, J = {}, M = {}, energy = {:.4}, unit = \"cm-1\" }},",
            s.id, s.label, s.nu, s.j, s.m, s.energy
        )
        .unwrap();
    }
    writeln!(doc, "]").unwrap();
    writeln!(doc).unwrap();
    writeln!(doc, "[dipoles]").unwrap();
    writeln!(doc, "records = [").unwrap();
    for (a, b, d) in &dipoles {
        writeln!(doc, "  {{ a = \"{a}\", b = \"{b}\", value = {:.9e}, unit = \"D\" }},", d * scale).unwrap();
    }
    writeln!(doc, "]").unwrap();

    std::fs::write(&out, doc).expect("write dataset");
    eprintln!(
        "{} states, {} dipoles, scale {scale:.6e}, chi_ni(w2) {chi_target:.6e} C m^2/V -> {out}",
        states.len(),
        dipoles.len()
    );
}
