use std::process::ExitCode;

fn main() -> ExitCode {
    let seed = std::env::var("AFFWALK_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut failed = 0;
    for r in affwalk::acceptance::run_all(seed) {
        println!("{r}");
        if !r.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
