fn main() {
    std::process::exit(spinmeter_cli::run(std::env::args_os()));
}
