//! One line per acceptance criterion; exits non-zero if any fails.

use qpfe_core::acceptance::run_all;

fn main() {
    let outcomes = run_all(|o| println!("{o}"));
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
