fn main() {
    std::process::exit(dmdp::cli::main());
}
