//! Chip-firing on a graph: stabilization, recurrence and the group law.

use critical_groups::flow::ChipGraph;
use critical_groups::generators;

fn main() {
    let k4 = generators::complete_graph(4).unwrap();
    let g = ChipGraph::new(&k4, 1).unwrap();
    println!("bank 1, vertices {:?}, degrees {:?}", g.labels(), g.degrees());

    let s = g.state(vec![5, 0, 1]).unwrap();
    let (stable, firings) = s.stabilize();
    println!("{s} stabilizes to {stable} after firings {firings:?}");

    let critical = g.critical_states();
    println!("{} critical states:", critical.len());
    for c in &critical {
        println!("  {c} -> {}", c.to_group_element());
    }

    let a = g.state(vec![2, 2, 1]).unwrap().critical_representative();
    let b = g.state(vec![1, 0, 2]).unwrap().critical_representative();
    let sum = a.critical_sum(&b);
    println!("{a} + {b} = {sum}");
    assert_eq!(sum.to_group_element(), &a.to_group_element() + &b.to_group_element());
}
