//! Running `nhlab` jobs in-process.
use newton_hodge::cli::main_with_args;

fn main() {
    let out = std::env::temp_dir().join("nhlab-example");
    let out = out.to_str().expect("utf-8 path");
    let jobs: [&[&str]; 4] = [
        &["nhlab", "check-equality", "--p", "5", "--f", "x^4"],
        &["nhlab", "--out", out, "polygon", "--p", "3", "--f", "x^5"],
        &["nhlab", "check-touching", "--p", "3", "--f", "x^5 + x^-2", "--r", "2/5"],
        &["nhlab", "perturb-suite", "--trials", "20", "--seed", "1"],
    ];
    for args in jobs {
        let code = main_with_args(args.iter().copied());
        println!("exit status {code}\n");
    }
}
