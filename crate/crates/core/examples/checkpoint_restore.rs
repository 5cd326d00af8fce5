//! Saves a synopsis mid-stream, restores it, and shows both copies stay in
//! lockstep.

use relcomp::synopsis::Synopsis;

pub fn main() -> relcomp::Result<()> {
    let mass = |i: usize| ((i as f64) * 0.013).sin().abs() + 0.01;
    let x: Vec<f64> = (0..200).map(|i| i as f64).collect();
    let phi: Vec<f64> = (0..200).map(mass).collect();
    let mut live = Synopsis::new(&x, &phi, 20, 0.1)?;
    for i in 200..5000 {
        live.observe(i as f64, mass(i))?;
    }

    let path = std::env::temp_dir().join(format!("synopsis-{}.json", std::process::id()));
    live.save(&path)?;
    let mut restored = Synopsis::load(&path)?;
    std::fs::remove_file(&path).ok();

    for i in 5000..8000 {
        live.observe(i as f64, mass(i))?;
        restored.observe(i as f64, mass(i))?;
    }
    assert_eq!(live, restored);
    assert_eq!(live.query()?, restored.query()?);
    println!("restored copy matches after {} points, n' = {}", live.n_seen(), live.n_prime());
    Ok(())
}
