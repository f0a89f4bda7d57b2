fn main() {
    std::process::exit(spt_sim::cli::run_from(std::env::args_os()));
}
