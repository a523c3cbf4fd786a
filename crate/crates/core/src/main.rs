fn main() {
    std::process::exit(seqconj::cli::run(std::env::args_os()));
}
