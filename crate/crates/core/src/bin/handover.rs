fn main() -> std::process::ExitCode {
    handover_core::cli::main()
}
