fn main() {
    std::process::exit(lexgeo::cli::run(std::env::args_os()));
}
