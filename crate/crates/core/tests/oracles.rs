//! Cross-checks of the fast paths against independent slow computations.

use softguess::asymptotics::{exact_block_cumulant, exact_block_moment};
use softguess::coding::{build_optimal_code_l, codeword, codeword_length, cumulant_length};
use softguess::entropy::{kuzuoka_solve, kuzuoka_solve_with, EntropyOrder, SolverOptions};
use softguess::guessing::min_moment_l;
use softguess::oracle::{brute_force_min_moment_l, conditional_moment_grid_oracle, kuzuoka_grid_oracle};
use softguess::pmf::{generate, iid_extension, Generator, JointPmf, ListSize};
use softguess::side_info::conditional_min_moment_l;

#[test]
fn six_atom_brute_force() {
    for seed in 0..12 {
        let p = generate(Generator::Random { m: 6, seed }).unwrap();
        for l in 1..=3 {
            let l = ListSize::new(l).unwrap();
            for eps in [0.0, 0.2] {
                let fast = min_moment_l(&p, 1.5, l, eps).unwrap().moment;
                let slow = brute_force_min_moment_l(&p, 1.5, l, eps).unwrap();
                assert!((fast - slow).abs() < 1e-9, "seed {seed} L={} eps={eps}", l.get());
            }
        }
    }
}

#[test]
fn shortlex_table_matches_closed_form() {
    // breadth-first enumeration of {0,1}*: "", 0, 1, 00, 01, ...
    let mut strings = vec![String::new()];
    let mut head = 0;
    while strings.len() < 1 << 16 {
        let s = strings[head].clone();
        strings.push(format!("{s}0"));
        strings.push(format!("{s}1"));
        head += 1;
    }
    for (i, s) in strings.iter().take(1 << 16).enumerate() {
        let l = i as u64 + 1;
        assert_eq!(codeword(l), *s);
        assert_eq!(codeword_length(l) as usize, s.len());
    }
}

#[test]
fn block_walk_matches_expanded_atoms() {
    for (q, n, d, eps) in [(0.2, 10, 0.2, 0.1), (0.3, 8, 0.0, 0.0), (0.1, 9, 0.35, 0.25)] {
        let base = generate(Generator::Bernoulli(q)).unwrap();
        let atoms = iid_extension(&base, n).unwrap().expand().unwrap();
        let l = ListSize::from_distortion(n as f64 * d).unwrap();
        for rho in [0.5, 1.0, 3.0] {
            let direct = min_moment_l(&atoms, rho, l, eps).unwrap().moment;
            let walked = exact_block_moment(&base, n, rho, d, eps).unwrap();
            assert!((direct - walked).abs() < 1e-9 * direct, "q={q} n={n} rho={rho}");
            let code = build_optimal_code_l(&atoms, l, eps).unwrap();
            let direct = cumulant_length(&code, &atoms, rho).unwrap();
            let walked = exact_block_cumulant(&base, n, rho, d, eps).unwrap();
            assert!((direct - walked).abs() < 1e-9, "q={q} n={n} rho={rho}");
        }
    }
}

#[test]
fn ternary_blocks_match_expanded_atoms() {
    let base = softguess::Pmf::new(&[0.5, 0.3, 0.2]).unwrap();
    let atoms = iid_extension(&base, 6).unwrap().expand().unwrap();
    assert_eq!(atoms.len(), 729);
    let l = ListSize::from_distortion(6.0 * 0.7).unwrap();
    let direct = min_moment_l(&atoms, 1.0, l, 0.05).unwrap().moment;
    let walked = exact_block_moment(&base, 6, 1.0, 0.7, 0.05).unwrap();
    assert!((direct - walked).abs() < 1e-9 * direct);
}

#[test]
fn exchange_descent_agrees_with_enumeration() {
    let no_enum = SolverOptions { max_vertices: 0, ..SolverOptions::default() };
    for seed in 0..20 {
        let j = JointPmf::random(2 + (seed as usize % 4), 5, seed).unwrap();
        for alpha in [0.3, 0.7] {
            let order = EntropyOrder::new(alpha).unwrap();
            let exact = kuzuoka_solve(&j, order, 0.15).unwrap();
            let descent = kuzuoka_solve_with(&j, order, 0.15, no_enum).unwrap();
            assert!(exact.exhaustive);
            assert!(descent.objective >= exact.objective - 1e-12);
            assert!(exact.objective >= exact.lower_bound - 1e-12);
        }
    }
}

#[test]
fn three_row_grids() {
    for seed in 0..4 {
        let j = JointPmf::random(3, 4, 100 + seed).unwrap();
        let order = EntropyOrder::new(0.5).unwrap();
        let v = kuzuoka_solve(&j, order, 0.2).unwrap().value;
        let g = kuzuoka_grid_oracle(&j, order, 0.2, 1e-5).unwrap();
        assert!((v - g).abs() < 1e-6, "seed {seed}: {v} vs {g}");
        let l = ListSize::new(2).unwrap();
        let (m, _) = conditional_min_moment_l(&j, 1.0, l, 0.2).unwrap();
        let g = conditional_moment_grid_oracle(&j, 1.0, l, 0.2, 1e-5).unwrap();
        assert!((m - g).abs() < 1e-9, "seed {seed}: {m} vs {g}");
    }
}
