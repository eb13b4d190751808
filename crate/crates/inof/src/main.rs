fn main() -> std::process::ExitCode {
    inof::cli::main()
}
