//! Splitting binary64 values into float-float pairs and doing arithmetic on them.
//!
//! ```text
//! cargo run -p dualprec --example df64_arithmetic
//! ```

use dualprec::df64::{two_prod, two_sum, ulp32};
use dualprec::Df64;

fn main() -> dualprec::Result<()> {
    let pi = std::f64::consts::PI;
    let d = Df64::split(pi)?;
    println!("pi          = {pi:.17}");
    println!("  high      = {:.9e}", d.high());
    println!("  low       = {:.9e}", d.low());
    println!(
        "  high+low  = {:.17} (error {:.2e})",
        d.to_f64(),
        (d.to_f64() - pi).abs()
    );
    println!(
        "  as f32    = {:.17} (error {:.2e})",
        pi as f32,
        (pi as f32 as f64 - pi).abs()
    );

    // the residuals are exact: s + e == a + b, p + e == a * b
    let (a, b) = (1.0f32, 1e-8f32);
    let (s, e) = two_sum(a, b)?;
    println!("\ntwo_sum(1, 1e-8)  = ({s}, {e:e})");
    let (p, e) = two_prod(1.1f32, 1.1f32)?;
    println!(
        "two_prod(1.1, 1.1) = ({p}, {e:e}); ulp32(p) = {:e}",
        ulp32(p)
    );

    let x = Df64::split(1.0 / 3.0)?;
    let y = Df64::split(2.0f64.sqrt())?;
    for (name, got, want) in [
        ("add", x.checked_add(y)?, 1.0 / 3.0 + 2.0f64.sqrt()),
        ("sub", x.checked_sub(y)?, 1.0 / 3.0 - 2.0f64.sqrt()),
        ("mul", x.checked_mul(y)?, 2.0f64.sqrt() / 3.0),
        ("div", x.checked_div(y)?, 1.0 / 3.0 / 2.0f64.sqrt()),
    ] {
        let rel = ((got.to_f64() - want) / want).abs();
        println!(
            "{name}: {got}  relative error {rel:.2e} (2^{:.1})",
            rel.log2()
        );
    }
    Ok(())
}
