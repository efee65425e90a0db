fn main() {
    std::process::exit(senti_risk_cli::run_cli(std::env::args_os()));
}
