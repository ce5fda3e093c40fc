fn main() -> std::process::ExitCode {
    matchconv::cli::main()
}
