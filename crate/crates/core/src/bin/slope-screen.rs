fn main() {
    std::process::exit(slope_screen::cli::run(std::env::args_os()));
}
