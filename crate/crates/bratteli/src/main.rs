fn main() -> std::process::ExitCode {
    bratteli::cli::main()
}
