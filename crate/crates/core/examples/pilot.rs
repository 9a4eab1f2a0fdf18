//! Recomputes the pinned constants and prints them as JSON.
//!
//! `cargo run --release -p aeq-core --example pilot > crates/core/constants/pinned.json`

fn main() -> Result<(), aeq_core::Error> {
    let constants = aeq_core::PinnedConstants::pilot()?;
    println!("{}", constants.to_json()?);
    Ok(())
}
