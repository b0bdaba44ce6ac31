//! Bundled-case solves against the recorded external reference objectives
//! (see tools/make_cases.py; references come from an independent
//! trust-region solve of the same program).

use std::time::Instant;

use opflab_grid::parse_matpower;
use opflab_solver::{assemble, kkt_residuals, solve, SolveOptions, SolveStatus};

fn cases_dir() -> String {
    format!("{}/../../cases", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn bundled_cases_match_reference_objectives() {
    let refs: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{}/refs.json", cases_dir())).unwrap())
            .unwrap();
    let mut names: Vec<&String> = refs.as_object().unwrap().keys().collect();
    names.sort();
    assert!(names.len() >= 5);

    for name in names {
        let entry = &refs[name];
        let case = parse_matpower(
            &std::fs::read_to_string(format!("{}/{}.m", cases_dir(), name)).unwrap(),
        )
        .unwrap();
        assert_eq!(case.n_buses(), entry["n_bus"].as_u64().unwrap() as usize);
        assert_eq!(case.n_gens(), entry["n_gen"].as_u64().unwrap() as usize);
        assert_eq!(case.n_loads(), entry["n_load"].as_u64().unwrap() as usize);

        let problem = assemble(&case).unwrap();
        let t0 = Instant::now();
        let sol = solve(&problem, None, None, &SolveOptions::default()).unwrap();
        let elapsed = t0.elapsed().as_secs_f64();
        assert_eq!(sol.status, SolveStatus::Optimal, "{name} did not converge");
        assert!(elapsed < 5.0, "{name} took {elapsed:.2}s");

        let reference = entry["objective"].as_f64().unwrap();
        let rel = (sol.objective - reference).abs() / reference.abs();
        assert!(
            rel <= 1e-4,
            "{name}: objective {obj} vs reference {reference} (rel {rel:.2e})",
            obj = sol.objective
        );

        let res = kkt_residuals(&problem, &sol).unwrap();
        assert!(res.max() <= 1e-6, "{name}: residuals {res:?}");
        println!(
            "{name}: obj {:.4} ref {reference:.4} rel {rel:.2e} iters {} in {elapsed:.2}s, {} active",
            sol.objective,
            sol.iterations,
            sol.active_set.len()
        );
    }
}
