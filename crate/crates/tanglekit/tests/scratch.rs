use tanglekit::curves::classify;
use tanglekit::cube::khovanov_complex;
use tanglekit::diagrams::{pretzel_tangle, TangleDiagram};
use tanglekit::simplify::{decompose, reduce, straighten};

fn pretzel() -> TangleDiagram {
    pretzel_tangle(2, -3).unwrap()
}

#[test]
fn probe_decompose_pretzel() {
    let kh = khovanov_complex(&pretzel());
    let red = reduce(&kh).complex;
    println!("reduced gens: {}", red.gen_count());
    let parts = decompose(&red);
    println!("parts: {:?}", parts.iter().map(|p| p.gen_count()).collect::<Vec<_>>());
    for p in &parts {
        let s = straighten(p);
        println!("--- part with {} gens", p.gen_count());
        for g in s.gens() {
            println!("  {} {:?} {}", g.id, g.idem, g.gr);
        }
        for (a, b, l) in s.arrows() {
            println!("  #{a} --{l}--> #{b}");
        }
        let cs = classify(p);
        println!("  classes: {:?}", cs.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    }
}
