//! Scratch experiment: r- and u-scaling of the cone integral per weight.
//! Run: cargo run -p tailwave --example cone_scaling --release

use tailwave::jbracket;
use tailwave::lightcone::{cone_quadrature, ConeWeight};

fn main() {
    let weights = [
        (2.5, 0.0, 2.0),
        (2.5, 0.5, 0.5),
        (2.9, 0.0, 2.0),
        (2.75, 0.0, -0.5),
        (2.5, 0.0, 0.5),
    ];
    println!("--- I*<r> at fixed u=64, growing r ---");
    for (a, b, e) in weights {
        let w = ConeWeight::new(a, b, e).unwrap();
        print!("({a},{b},{e}):");
        for r in [256.0, 512.0, 1024.0, 2048.0, 4096.0] {
            let u = 64.0;
            match cone_quadrature(&w, r + u, r, 512 * 512) {
                Ok(q) => print!("  {:.4e}", q.value * jbracket(r)),
                Err(err) => print!("  ERR({err})"),
            }
        }
        println!();
    }
    println!("--- I*<r> at fixed r=1024, u-sweep (slope -> p_u) ---");
    for (a, b, e) in weights {
        let w = ConeWeight::new(a, b, e).unwrap();
        print!("({a},{b},{e}):");
        let mut prev: Option<f64> = None;
        for u in [32.0, 64.0, 128.0, 256.0, 512.0] {
            let r = 1024.0;
            match cone_quadrature(&w, r + u, r, 1024 * 1024) {
                Ok(q) => {
                    let v = q.value * jbracket(r);
                    if let Some(p) = prev {
                        print!("  [{:+.3}]", -(v / p).ln() / 2.0f64.ln());
                    }
                    print!(" {:.4e}", v);
                    prev = Some(v);
                }
                Err(err) => print!("  ERR({err})"),
            }
        }
        println!();
    }
}
