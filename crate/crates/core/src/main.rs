fn main() {
    std::process::exit(ecs_core::cli::run());
}
