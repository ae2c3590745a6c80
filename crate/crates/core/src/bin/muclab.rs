fn main() -> std::process::ExitCode {
    muclab::harness::cli::main()
}
