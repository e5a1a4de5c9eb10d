fn main() -> std::process::ExitCode {
    roamauth::cli::main()
}
