//! Drives the command-line front end in-process.

use rank1::cli::run;

fn main() {
    let commands: [&[&str]; 5] = [
        &["rank1", "branch", "--n", "3", "--weight", "1"],
        &["rank1", "ode-check", "--n", "3", "--D", "-4", "--y0", "1", "--y0p", "0"],
        &["rank1", "summability", "--alpha", "2", "--s", "-3"],
        &["rank1", "--format", "csv", "weyl-count", "--n", "3"],
        &["rank1", "branch", "--n", "3", "--weight", "1,2"],
    ];
    for args in commands {
        let out = run(args.iter().copied());
        println!("$ {} -> exit {}", args[1..].join(" "), out.exit_code);
        print!("{}{}", out.stdout, out.stderr);
    }
}
