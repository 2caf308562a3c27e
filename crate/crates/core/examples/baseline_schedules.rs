//! Constant, cosine and rsqrt stepsize schedules.

use glyder::schedulers::BaselineSchedule;

fn main() -> Result<(), glyder::Error> {
    let horizon = 500;
    let schedules = [
        BaselineSchedule::Constant { eta0: 0.1 },
        BaselineSchedule::Cosine { eta0: 0.1, horizon },
        BaselineSchedule::Rsqrt { eta0: 0.1, squash: 100.0 },
    ];
    println!("{:>5} {:>10} {:>10} {:>10}", "t", "constant", "cosine", "rsqrt");
    for t in (0..=horizon).step_by(100) {
        let v: Vec<f64> = schedules.iter().map(|s| s.stepsize(t)).collect::<Result<_, _>>()?;
        println!("{t:>5} {:>10.5} {:>10.5} {:>10.5}", v[0], v[1], v[2]);
    }
    Ok(())
}
