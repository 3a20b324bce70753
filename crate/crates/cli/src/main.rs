fn main() {
    // placeholder until the CLI lands
}
