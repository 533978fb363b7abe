fn main() {
    std::process::exit(fractal_crack::cli::run(std::env::args_os()));
}
