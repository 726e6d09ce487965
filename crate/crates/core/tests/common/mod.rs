//! Seeded synthetic datasets shaped like the public datasets used in the
//! examples. The values are generated, not copied, so only the column layout
//! matches.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Medical-cost style table: `age,sex,bmi,children,smoker,region,charges`.
pub fn insurance_like(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 4000.0).unwrap();
    let regions = ["northeast", "northwest", "southeast", "southwest"];
    let mut s = String::from("age,sex,bmi,children,smoker,region,charges\n");
    for _ in 0..n {
        let age: u32 = rng.random_range(18..=64);
        let female = rng.random_bool(0.5);
        let bmi: f64 = (rng.random_range(16.0..48.0f64) * 100.0).round() / 100.0;
        let children: u32 = rng.random_range(0..=5);
        let smoker = rng.random_bool(0.2);
        let region = regions[rng.random_range(0..4)];
        let charges = 260.0 * age as f64 + 320.0 * bmi + 480.0 * children as f64 + if smoker { 23800.0 } else { 0.0 }
            - 12000.0
            + noise.sample(&mut rng);
        s.push_str(&format!(
            "{age},{},{bmi},{children},{},{region},{:.4}\n",
            if female { "female" } else { "male" },
            if smoker { "yes" } else { "no" },
            charges.max(1100.0)
        ));
    }
    s
}

/// Study-habits table with a `Performance Index` target.
pub fn student_like(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let mut s = String::from(
        "Hours Studied,Previous Scores,Extracurricular Activities,Sleep Hours,Sample Question Papers Practiced,Performance Index\n",
    );
    for _ in 0..n {
        let h: u32 = rng.random_range(1..=9);
        let p: u32 = rng.random_range(40..=99);
        let e = rng.random_bool(0.5);
        let sl: u32 = rng.random_range(4..=9);
        let q: u32 = rng.random_range(0..=9);
        let y = -34.0
            + 2.85 * h as f64
            + 1.02 * p as f64
            + if e { 0.6 } else { 0.0 }
            + 0.48 * sl as f64
            + 0.19 * q as f64
            + noise.sample(&mut rng);
        s.push_str(&format!("{h},{p},{},{sl},{q},{}\n", if e { "Yes" } else { "No" }, y.round().clamp(10.0, 100.0)));
    }
    s
}

/// The ten sample rows of the house-price table quoted in the examples.
pub const REAL_ESTATE_SAMPLE: &str = "No,X1 transaction date,X2 house age,X3 distance to the nearest MRT station,X4 number of convenience stores,X5 latitude,X6 longitude,Y house price of unit area
1,2012.917,32,84.87882,10,24.98298,121.54024,37.9
2,2012.917,19.5,306.5947,9,24.98034,121.53951,42.2
3,2013.583,13.3,561.9845,5,24.98746,121.54391,47.3
4,2013.500,13.3,561.9845,5,24.98746,121.54391,54.8
5,2012.833,5,390.5684,5,24.97937,121.54245,43.1
6,2012.667,7.1,2175.03,3,24.96305,121.51254,32.1
7,2012.667,34.5,623.4731,7,24.97933,121.53642,40.3
8,2013.417,20.3,287.6025,6,24.98042,121.54228,46.7
9,2013.500,31.7,5512.038,1,24.95095,121.48458,18.8
10,2013.417,17.9,1783.18,3,24.96731,121.51486,22.1
";

/// House-price table in the same layout, `n` generated rows.
pub fn real_estate_like(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 3.0).unwrap();
    let mut s = String::from(REAL_ESTATE_SAMPLE.lines().next().unwrap());
    s.push('\n');
    for i in 1..=n {
        let date = 2012.667 + (rng.random_range(0..12) as f64) / 12.0;
        let age: f64 = (rng.random_range(0.0..43.0f64) * 10.0).round() / 10.0;
        let dist: f64 = rng.random_range(20.0..6500.0);
        let stores: u32 = rng.random_range(0..=10);
        let lat: f64 = rng.random_range(24.93..25.01);
        let lon: f64 = rng.random_range(121.47..121.57);
        let price = 42.0 - 0.25 * age - 0.005 * dist + 1.2 * stores as f64 + noise.sample(&mut rng);
        s.push_str(&format!("{i},{date:.3},{age},{dist:.4},{stores},{lat:.5},{lon:.5},{:.1}\n", price.max(5.0)));
    }
    s
}

/// Listening log `user_id,artistname,trackname,playlistname` where users in
/// the same taste group share playlists.
pub fn playlist_like(users: usize, events: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = 4;
    let per_group = 12;
    let mut s = String::from("user_id,artistname,trackname,playlistname\n");
    for _ in 0..events {
        let u = rng.random_range(0..users);
        let g = u % groups;
        let p = g * per_group + rng.random_range(0..per_group);
        s.push_str(&format!("{},artist {},track {},playlist {p:02}\n", 4400 + u, p % 7, rng.random_range(0..50)));
    }
    s
}

/// Binary-target table: `age,income,visits,churned` with `churned` in {0,1}.
pub fn churn_like(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = String::from("age,income,visits,churned\n");
    for _ in 0..n {
        let age: u32 = rng.random_range(18..=80);
        let income: u32 = rng.random_range(20..=150);
        let visits: u32 = rng.random_range(0..=30);
        let z = 0.04 * (age as f64 - 45.0) - 0.25 * (visits as f64 - 15.0) + rng.random_range(-1.0..1.0);
        s.push_str(&format!("{age},{income},{visits},{}\n", u8::from(z > 0.0)));
    }
    s
}
