fn main() {
    std::process::exit(seqsim::cli::main());
}
