fn main() {
    std::process::exit(nonsmooth_plast::cli::run(std::env::args_os()));
}
