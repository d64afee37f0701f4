//! Acceptance criteria 1–10, one pass/fail line each, against the shipped configuration.

use std::time::{Duration, Instant};

use chiral_bag::config::Config;
use chiral_bag_cli::suites::{self, AnsatzSource};
use chiral_bag_cli::Report;

struct Criterion {
    number: usize,
    title: &'static str,
    budget: Duration,
    run: fn(&Config) -> Report,
}

fn wz_both(_: &Config) -> Report {
    let mut r = suites::wz_solve(&AnsatzSource::A45);
    r.merge(suites::wz_solve(&AnsatzSource::A3stru));
    r
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        number: 1,
        title: "kernel boundary conditions and heat equation",
        budget: Duration::from_secs(60),
        run: suites::verify_kernel,
    },
    Criterion { number: 2, title: "c4 against f6", budget: Duration::from_secs(10), run: suites::f6_reproduction },
    Criterion { number: 3, title: "c3 against G4", budget: Duration::from_secs(10), run: suites::g4_reproduction },
    Criterion { number: 4, title: "bulk ABJ term", budget: Duration::from_secs(60), run: suites::abj },
    Criterion { number: 5, title: "boundary parity-odd term", budget: Duration::from_secs(60), run: suites::parity },
    Criterion { number: 6, title: "imaginarity suite", budget: Duration::from_secs(60), run: suites::imaginarity },
    Criterion {
        number: 7,
        title: "Dyson consistency and chiral-variation identity",
        budget: Duration::from_secs(300),
        run: suites::dyson_consistency,
    },
    Criterion { number: 8, title: "Wess-Zumino and symmetry constraints", budget: Duration::from_secs(1), run: wz_both },
    Criterion { number: 9, title: "fiber spectral symmetry", budget: Duration::from_secs(30), run: suites::fiber_spectrum },
    Criterion { number: 10, title: "coefficient extraction", budget: Duration::from_secs(300), run: suites::extraction },
];

fn main() {
    let cfg = Config::shipped();
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let report = (c.run)(&cfg);
        let took = start.elapsed();
        let in_time = took < c.budget;
        let pass = report.passed() && in_time;
        let mut why: Vec<String> = report.failures().map(|a| format!("{}: {}", a.name, a.detail)).collect();
        if !in_time {
            why.push(format!("runtime {took:.2?} exceeds {:?}", c.budget));
        }
        println!(
            "criterion {:>2} {}: {} ({} assertions, {took:.2?}){}",
            c.number,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            report.assertions.len(),
            if why.is_empty() { String::new() } else { format!(" [{}]", why.join("; ")) }
        );
        if !pass {
            failed.push(c.number);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", CRITERIA.len());
}
