fn main() {
    std::process::exit(sphframes_cli::run(std::env::args_os()));
}
