fn main() {
    std::process::exit(dirac_torsion::cli::run(std::env::args_os()));
}
