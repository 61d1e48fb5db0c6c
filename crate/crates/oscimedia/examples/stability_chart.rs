//! Render the Mathieu stability chart as text. Unstable cells print as '#',
//! stable ones as '.'; the two tongues rooted at a = 1 and a = 4 stand out
//! immediately.

use oscimedia::mathieu::{stability_chart, StabilityClass};

fn main() -> Result<(), oscimedia::Error> {
    let res = 72;
    let chart = stability_chart((0.0, 5.0), (-1.0, 1.0), res)?;

    // a runs top to bottom, q left to right
    println!("a in [0, 5] (top = 5), q in [-1, 1]:");
    for ia in (0..res).rev() {
        let mut row = String::with_capacity(res);
        for iq in 0..res {
            row.push(match chart.class_at(ia, iq) {
                StabilityClass::Unstable => '#',
                StabilityClass::Stable => '.',
                StabilityClass::Unknown => '?',
            });
        }
        println!("  {row}");
    }

    let unstable = chart
        .class
        .iter()
        .filter(|c| **c == StabilityClass::Unstable)
        .count();
    println!(
        "\n{unstable} of {} cells unstable ({:.1}%)",
        res * res,
        100.0 * unstable as f64 / (res * res) as f64
    );
    Ok(())
}
