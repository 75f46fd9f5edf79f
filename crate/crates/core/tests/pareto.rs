mod support;

use approx::assert_relative_eq;
use heatdispatch_core::formulation::{build_dispatch, validate_solution, Unit};
use heatdispatch_core::moo::{dominance_filter, pareto_front, solve_single, DispatchModel, Objective, SweepOptions};
use heatdispatch_lp::solve_lp;
use support::toy::*;

/// Cheapest dispatch over a grid of per-step gas shares with emissions within `eps`.
fn brute_force(heat: &[f64], eps: f64, grid: usize) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let n = heat.len();
    let mut idx = vec![0usize; n];
    loop {
        let (mut cost, mut em) = (0.0, 0.0);
        for (t, &k) in idx.iter().enumerate() {
            let s = k as f64 / grid as f64;
            cost += heat[t] * (GAS_COST * s + WOOD_COST * (1.0 - s));
            em += heat[t] * (GAS_EM * s + WOOD_EM * (1.0 - s));
        }
        if em <= eps * (1.0 + 1e-6) && best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, em));
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] <= grid {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[test]
fn front_matches_grid_enumeration() {
    let heat = [10.0, 20.0, 30.0];
    let p = two_tech(&heat);
    let front = pareto_front(&p, 5, &SweepOptions::default()).unwrap();
    assert_eq!(front.sweep.len(), 5);
    for point in &front.sweep {
        let (cost, _) = brute_force(&heat, point.epsilon, 20).unwrap();
        assert_relative_eq!(point.cost, cost, max_relative = 1e-4);
        assert!(point.emissions <= point.epsilon * (1.0 + 1e-6));
    }
    assert_eq!(front.points.len(), 5);
    assert_relative_eq!(front.points[0].emissions, 60.0 * WOOD_EM, max_relative = 1e-8);
    assert_relative_eq!(front.points[4].cost, 60.0 * GAS_COST, max_relative = 1e-8);
}

#[test]
fn two_points_are_the_endpoints() {
    let p = two_tech(&[10.0, 20.0]);
    let front = pareto_front(&p, 2, &SweepOptions::default()).unwrap();
    assert_eq!(front.sweep.len(), 2);
    assert_eq!(front.sweep[0].solution, front.emissions_optimal);
    assert_eq!(front.sweep[1].solution, front.cost_optimal);
    assert!(pareto_front(&p, 1, &SweepOptions::default()).is_err());
}

#[test]
fn epsilon_between_endpoints_costs_in_between() {
    // E from 0.6 t (all wood) to 6 t (all gas); 3.3 t allows 15 MWh of gas
    let p = two_tech(&[10.0, 20.0]);
    let model = DispatchModel::new(&p).unwrap();
    let sol = model.solve_epsilon(3.3).unwrap().unwrap();
    assert_relative_eq!(sol.cost, 30.0 * WOOD_COST - 15.0 * (WOOD_COST - GAS_COST), max_relative = 1e-9);
    assert!(sol.cost > 30.0 * GAS_COST && sol.cost < 30.0 * WOOD_COST);
    assert!(model.solve_epsilon(0.5).unwrap().is_none());
}

#[test]
fn free_clean_unit_serves_everything() {
    let mut p = two_tech(&[10.0, 25.0, 5.0]);
    p.wood_boiler.fuel.cost = heatdispatch_core::model::FuelCost::PerKwh(0.0);
    p.wood_boiler.emission_intensity = 0.0;
    for objective in [Objective::Cost, Objective::Emissions] {
        let sol = solve_single(&p, objective).unwrap();
        assert_relative_eq!(sol.totals.heat_delivered(Unit::WoodBoiler), 40.0, max_relative = 1e-8);
        assert!(sol.totals.fuel(Unit::GasTurbine).abs() < 1e-9);
        assert!(sol.cost.abs() < 1e-9 && sol.emissions.abs() < 1e-9);
    }
}

#[test]
fn cheap_dirty_gas_takes_the_margin_under_cost() {
    let mut p = two_tech(&[20.0]);
    p.wood_boiler.thermal_capacity = Some(15.0);
    let green = solve_single(&p, Objective::Emissions).unwrap();
    assert_relative_eq!(green.totals.heat_delivered(Unit::GasTurbine), 5.0, max_relative = 1e-8);
    let cheap = solve_single(&p, Objective::Cost).unwrap();
    assert_relative_eq!(cheap.totals.heat_delivered(Unit::GasTurbine), 20.0, max_relative = 1e-8);
    assert!(cheap.emissions > green.emissions);
    assert!(cheap.cost < green.cost);
}

#[test]
fn warm_and_cold_sweeps_agree() {
    let heat: Vec<f64> = (0..24).map(|t| 30.0 + 25.0 * ((t as f64) / 4.0).sin()).collect();
    let elec: Vec<f64> = (0..24).map(|t| 90.0 + 20.0 * ((t as f64) / 5.0).cos()).collect();
    let p = reference_plant(&heat, &elec, true);
    let warm = pareto_front(&p, 7, &SweepOptions { warm_start: true }).unwrap();
    let cold = pareto_front(&p, 7, &SweepOptions { warm_start: false }).unwrap();
    assert_eq!(warm.sweep.len(), cold.sweep.len());
    for (a, b) in warm.sweep.iter().zip(&cold.sweep) {
        assert_eq!(a.epsilon, b.epsilon);
        assert_relative_eq!(a.cost, b.cost, max_relative = 1e-7);
        assert!(a.emissions <= a.epsilon * (1.0 + 1e-6) && b.emissions <= b.epsilon * (1.0 + 1e-6));
    }
}

#[test]
fn front_properties_on_the_reference_plant() {
    let heat: Vec<f64> = (0..48).map(|t| 20.0 + 40.0 * ((t as f64) / 7.0).sin().abs()).collect();
    let elec = vec![100.0; 48];
    let p = reference_plant(&heat, &elec, true);
    let front = pareto_front(&p, 11, &SweepOptions::default()).unwrap();
    for w in front.sweep.windows(2) {
        assert!(w[1].cost <= w[0].cost * (1.0 + 1e-9) + 1e-9, "cost rose with epsilon");
    }
    for w in front.points.windows(2) {
        assert!(w[1].emissions > w[0].emissions && w[1].cost < w[0].cost);
    }
    let filtered = dominance_filter(&front.points);
    assert_eq!(filtered.len(), front.points.len());
    for q in &front.points {
        assert!(front.cost_optimal.cost <= q.cost * (1.0 + 1e-6));
        assert!(front.emissions_optimal.emissions <= q.emissions * (1.0 + 1e-6));
        assert!(validate_solution(&q.solution, &p).is_empty());
    }

    // endpoints against plain single-stage solves
    let (mut lp, _, ex) = build_dispatch(&p).unwrap();
    let min_cost = solve_lp(&lp).unwrap().objective_value;
    lp.set_objective(ex.emissions.iter().copied()).unwrap();
    let min_em = solve_lp(&lp).unwrap().objective_value;
    assert_relative_eq!(front.points[0].emissions, min_em, max_relative = 1e-6);
    assert_relative_eq!(front.points.last().unwrap().cost, min_cost, max_relative = 1e-6);

    let mut csv = Vec::new();
    front.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("epsilon_tco2,cost_chf,emissions_tco2,solution_id\n"));
    assert_eq!(text.lines().count(), front.points.len() + 1);
}

#[test]
fn storage_never_raises_cost_at_a_shared_epsilon() {
    let heat: Vec<f64> = (0..48).map(|t| if t % 24 < 12 { 10.0 } else { 70.0 }).collect();
    let elec = vec![100.0; 48];
    let without = reference_plant(&heat, &elec, false);
    let with = reference_plant(&heat, &elec, true);
    let front = pareto_front(&without, 6, &SweepOptions::default()).unwrap();
    let model = DispatchModel::new(&with).unwrap();
    for q in &front.sweep {
        let s = model.solve_epsilon(q.epsilon).unwrap().expect("storage only enlarges the feasible set");
        assert!(s.cost <= q.cost * (1.0 + 1e-6) + 1e-6);
    }
}
