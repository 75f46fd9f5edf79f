//! Brute-force reference solvers for tiny programs.
//!
//! Continuous programs are solved by enumerating every vertex of the feasible
//! polyhedron (all subsets of `n` active constraints, including bounds), and
//! binary programs by enumerating every 0/1 assignment. Nothing here touches
//! the simplex code.

#![allow(dead_code)]

use heatdispatch_lp::{LinearProgram, Sense};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleResult {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// One row `a . x (sense) b` of the oracle's own representation.
#[derive(Debug, Clone)]
struct Halfspace {
    a: Vec<f64>,
    sense: Sense,
    b: f64,
}

const FEAS: f64 = 1e-9;

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn satisfied(h: &Halfspace, x: &[f64]) -> bool {
    let act: f64 = h.a.iter().zip(x).map(|(a, x)| a * x).sum();
    let tol = FEAS * (1.0 + h.b.abs() + x.iter().map(|v| v.abs()).sum::<f64>());
    match h.sense {
        Sense::Le => act <= h.b + tol,
        Sense::Ge => act >= h.b - tol,
        Sense::Eq => (act - h.b).abs() <= tol,
    }
}

fn combinations(k: usize, n: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, k: usize, n: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == n {
            f(cur);
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, n, cur, f);
            cur.pop();
        }
    }
    rec(0, k, n, &mut Vec::new(), f);
}

/// Minimum of `c . x` over the polytope, or `None` when it is empty.
fn best_vertex(halfspaces: &[Halfspace], c: &[f64]) -> Option<f64> {
    let n = c.len();
    if n == 0 {
        return halfspaces.iter().all(|h| satisfied(h, &[])).then_some(0.0);
    }
    let mut best: Option<f64> = None;
    combinations(halfspaces.len(), n, &mut |subset| {
        let a = subset.iter().map(|&k| halfspaces[k].a.clone()).collect();
        let b = subset.iter().map(|&k| halfspaces[k].b).collect();
        if let Some(x) = gauss_solve(a, b) {
            if halfspaces.iter().all(|h| satisfied(h, &x)) {
                let v: f64 = c.iter().zip(&x).map(|(c, x)| c * x).sum();
                if best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
        }
    });
    best
}

fn halfspaces_with_box(rows: &[Halfspace], lower: &[f64], upper: &[f64], big: f64) -> Vec<Halfspace> {
    let n = lower.len();
    let mut hs = rows.to_vec();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        hs.push(Halfspace {
            a: e.clone(),
            sense: Sense::Ge,
            b: lower[j],
        });
        hs.push(Halfspace {
            a: e,
            sense: Sense::Le,
            b: if upper[j].is_finite() { upper[j] } else { big },
        });
    }
    hs
}

/// Solves a continuous program by vertex enumeration. Infinite upper bounds
/// are replaced by two different boxes; an optimum that moves with the box is
/// an unbounded ray.
fn solve_continuous(rows: &[Halfspace], lower: &[f64], upper: &[f64], c: &[f64]) -> OracleResult {
    let near = best_vertex(&halfspaces_with_box(rows, lower, upper, 1e6), c);
    let Some(near) = near else {
        return OracleResult::Infeasible;
    };
    if upper.iter().all(|u| u.is_finite()) {
        return OracleResult::Optimal(near);
    }
    let far = best_vertex(&halfspaces_with_box(rows, lower, upper, 1e7), c)
        .expect("a larger box keeps feasibility");
    if far < near - 1e-6 * near.abs().max(1.0) {
        OracleResult::Unbounded
    } else {
        OracleResult::Optimal(near)
    }
}

fn split(lp: &LinearProgram) -> (Vec<Halfspace>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = lp.num_variables();
    let rows = lp
        .constraints()
        .iter()
        .map(|con| {
            let mut a = vec![0.0; n];
            for &(v, coef) in &con.coefficients {
                a[v.index()] += coef;
            }
            Halfspace {
                a,
                sense: con.sense,
                b: con.rhs,
            }
        })
        .collect();
    let mut c = vec![0.0; n];
    for &(v, coef) in lp.objective() {
        c[v.index()] += coef;
    }
    let lower = lp.variables().iter().map(|d| d.lower).collect();
    let upper = lp.variables().iter().map(|d| d.upper).collect();
    (rows, lower, upper, c)
}

/// Continuous relaxation of `lp` by vertex enumeration.
pub fn lp_by_vertices(lp: &LinearProgram) -> OracleResult {
    let (rows, lower, upper, c) = split(lp);
    solve_continuous(&rows, &lower, &upper, &c)
}

/// Binary program by exhaustive enumeration of the binaries; the remaining
/// continuous variables are solved by vertex enumeration per assignment.
pub fn milp_by_enumeration(lp: &LinearProgram) -> OracleResult {
    let (rows, lower, upper, c) = split(lp);
    let n = lower.len();
    let binaries: Vec<usize> = lp.binaries().iter().map(|v| v.index()).collect();
    let continuous: Vec<usize> = (0..n).filter(|j| !binaries.contains(j)).collect();
    let mut best = OracleResult::Infeasible;
    for mask in 0u32..(1 << binaries.len()) {
        let fixed: Vec<f64> = (0..binaries.len())
            .map(|k| f64::from((mask >> k) & 1))
            .collect();
        if binaries
            .iter()
            .zip(&fixed)
            .any(|(&j, &v)| v < lower[j] || v > upper[j])
        {
            continue;
        }
        let reduced_rows: Vec<Halfspace> = rows
            .iter()
            .map(|h| {
                let shift: f64 = binaries.iter().zip(&fixed).map(|(&j, &v)| h.a[j] * v).sum();
                Halfspace {
                    a: continuous.iter().map(|&j| h.a[j]).collect(),
                    sense: h.sense,
                    b: h.b - shift,
                }
            })
            .collect();
        let offset: f64 = binaries.iter().zip(&fixed).map(|(&j, &v)| c[j] * v).sum();
        let sub = solve_continuous(
            &reduced_rows,
            &continuous.iter().map(|&j| lower[j]).collect::<Vec<_>>(),
            &continuous.iter().map(|&j| upper[j]).collect::<Vec<_>>(),
            &continuous.iter().map(|&j| c[j]).collect::<Vec<_>>(),
        );
        best = match (best, sub) {
            (_, OracleResult::Unbounded) | (OracleResult::Unbounded, _) => OracleResult::Unbounded,
            (OracleResult::Infeasible, OracleResult::Optimal(v)) => OracleResult::Optimal(v + offset),
            (OracleResult::Optimal(b), OracleResult::Optimal(v)) => OracleResult::Optimal(b.min(v + offset)),
            (b, OracleResult::Infeasible) => b,
        };
    }
    best
}

/// Deterministic small-integer program generator shared by the oracle suites.
pub mod gen {
    use heatdispatch_lp::{LinearProgram, Sense};

    /// SplitMix64, so the instance stream is fixed independent of any crate.
    pub struct Stream(u64);

    impl Stream {
        pub fn new(seed: u64) -> Self {
            Self(seed)
        }

        pub fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }

        /// Uniform integer in `lo..=hi`.
        pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
            lo + (self.next_u64() % (hi - lo + 1) as u64) as i64
        }

        pub fn chance(&mut self, percent: u64) -> bool {
            self.next_u64() % 100 < percent
        }

        fn sense(&mut self) -> Sense {
            match self.int(0, 5) {
                0 => Sense::Eq,
                1 | 2 => Sense::Ge,
                _ => Sense::Le,
            }
        }
    }

    /// At most 4 variables and 6 rows; some upper bounds infinite.
    pub fn random_lp(s: &mut Stream) -> LinearProgram {
        let mut lp = LinearProgram::new();
        let n = s.int(1, 4) as usize;
        let vars: Vec<_> = (0..n)
            .map(|j| {
                let lo = s.int(-3, 1) as f64;
                let up = if s.chance(30) {
                    f64::INFINITY
                } else {
                    lo + s.int(0, 8) as f64
                };
                lp.add_variable(format!("x{j}"), lo, up).unwrap()
            })
            .collect();
        let rows = s.int(0, 6);
        for r in 0..rows {
            let coeffs: Vec<_> = vars
                .iter()
                .filter_map(|&v| {
                    let a = s.int(-5, 5);
                    (a != 0 && !s.chance(25)).then_some((v, a as f64))
                })
                .collect();
            let sense = s.sense();
            let rhs = s.int(-10, 12) as f64;
            lp.add_constraint(format!("r{r}"), coeffs, sense, rhs).unwrap();
        }
        lp.set_objective(vars.iter().map(|&v| (v, s.int(-5, 5) as f64)))
            .unwrap();
        lp
    }

    /// Up to 8 binaries plus up to 2 bounded continuous variables.
    pub fn random_milp(s: &mut Stream) -> LinearProgram {
        let mut lp = LinearProgram::new();
        let nb = s.int(1, 8) as usize;
        let nc = s.int(0, 2) as usize;
        let mut vars = Vec::new();
        for j in 0..nb {
            vars.push(lp.add_binary(format!("b{j}")).unwrap());
        }
        for j in 0..nc {
            let lo = s.int(-2, 0) as f64;
            vars.push(lp.add_variable(format!("y{j}"), lo, lo + s.int(1, 6) as f64).unwrap());
        }
        let rows = s.int(1, 5);
        for r in 0..rows {
            let coeffs: Vec<_> = vars
                .iter()
                .filter_map(|&v| {
                    let a = s.int(-6, 6);
                    (a != 0 && !s.chance(30)).then_some((v, a as f64))
                })
                .collect();
            let sense = s.sense();
            let rhs = s.int(-6, 10) as f64 + if s.chance(30) { 0.5 } else { 0.0 };
            lp.add_constraint(format!("r{r}"), coeffs, sense, rhs).unwrap();
        }
        lp.set_objective(vars.iter().map(|&v| (v, s.int(-9, 9) as f64)))
            .unwrap();
        lp
    }
}
