fn main() {
    // placeholder; wired up once the core library lands
}
