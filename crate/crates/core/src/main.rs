fn main() -> std::process::ExitCode {
    fbsim::cli::main()
}
