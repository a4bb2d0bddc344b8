fn main() -> std::process::ExitCode {
    momentopt::cli::main()
}
