use apml_core::analytic::zeta::zeta;
use apml_core::analytic::C64;

#[test]
fn zeta_matches_high_precision_oracle() {
    let data = include_str!("data/zeta_oracle.csv");
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for line in data.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.trim().parse().unwrap()).collect();
        let want = C64::new(f[2], f[3]);
        let got = zeta(C64::new(f[0], f[1])).unwrap();
        let err = (got - want).norm() / want.norm().max(1.0);
        assert!(err <= 1e-10, "s = {} + {}i: got {got}, want {want}", f[0], f[1]);
        worst = worst.max(err);
        n += 1;
    }
    assert!(n >= 100);
    println!("zeta oracle: {n} points, worst scaled error {worst:.2e}");
}
