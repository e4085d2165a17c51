fn main() -> std::process::ExitCode {
    nnga::cli::main()
}
