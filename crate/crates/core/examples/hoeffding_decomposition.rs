use ustat::hoeffding::{decompose, indices_of, is_degenerate};
use ustat::{DiscreteDistribution, ProductSpace, StatisticTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = ProductSpace::iid(&DiscreteDistribution::rademacher(), 3)?;
    // Y = x1 + x1 x2 + x1 x2 x3 + 2
    let y = StatisticTable::from_fn(&space, |x| x[0] + x[0] * x[1] + x[0] * x[1] * x[2] + 2.0);
    let d = decompose(&y, &space)?;
    for (mask, component) in d.components() {
        let energy = component.second_moment(&space);
        if energy > 1e-12 {
            println!("M = {:?}: E[Y_M^2] = {energy}", indices_of(mask));
        }
    }
    let rebuilt = d.reconstruct(&space);
    let err = rebuilt
        .values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("reconstruction error {err:.2e}");
    println!("degenerate of order 2: {}", is_degenerate(&y, &space, 2)?);

    let xy = StatisticTable::from_fn(&space, |x| x[1] * x[2]);
    println!(
        "x2 x3 degenerate of order 2: {}",
        is_degenerate(&xy, &space, 2)?
    );
    Ok(())
}
