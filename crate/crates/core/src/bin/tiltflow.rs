fn main() -> std::process::ExitCode {
    tiltflow::cli::run(std::env::args_os())
}
