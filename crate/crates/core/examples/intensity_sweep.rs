// Minimum transmission against weak-pulse intensity, written as CSV for plotting.

use qkd_limits::cli;

fn main() {
    let args = "qkd-limits sweep --axis mu --start 1e-4 --stop 0.1 --steps 25 --scale log --of bound --format csv";
    let code = cli::run(args.split_whitespace(), &mut std::io::stdout(), &mut std::io::stderr());
    assert_eq!(code, 0);
}
