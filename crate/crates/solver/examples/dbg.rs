use opflab_grid::parse_matpower;
use opflab_solver::{assemble, solve, SolveOptions};

fn main() {
    let case = parse_matpower(&std::fs::read_to_string("cases/case4.m").unwrap()).unwrap();
    let problem = assemble(&case).unwrap();
    let mut o = SolveOptions::default();
    o.trace = true;
    let sol = solve(&problem, None, None, &o).unwrap();
    println!("full: {:?} iters {} active {:?}", sol.status, sol.iterations, sol.active_set);
    let red = solve(&problem, None, Some(&sol.active_set), &o).unwrap();
    println!("reduced: {:?} iters {}", red.status, red.iterations);
    for row in red.trace.iter().rev().take(8).rev() { println!("{row}"); }
}
