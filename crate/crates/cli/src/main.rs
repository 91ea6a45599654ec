fn main() {
    std::process::exit(social_affordance_cli::run(std::env::args_os()));
}
