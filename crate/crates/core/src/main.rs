fn main() {
    std::process::exit(ddqn_trader::cli::run(std::env::args_os()));
}
