fn main() -> std::process::ExitCode {
    favard::cli::main()
}
