fn main() { systolic_dse::cli::main() }
