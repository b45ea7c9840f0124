fn main() {
    std::process::exit(narp::cli::main(std::env::args_os()));
}
