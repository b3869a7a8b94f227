//! Firing faces, conservative flows and group coordinates.

use critical_groups::flow::{self, Configuration, GroupCoordinates};
use critical_groups::generators;
use critical_groups::trees;
use num_bigint::BigInt;

fn main() {
    let b = generators::bipyramid();
    let tree = trees::find_torsion_free_tree(&b, 1).unwrap();
    let coords = GroupCoordinates::new(&b, &tree).unwrap();
    println!("K_1 coordinates have moduli {:?}, order {:?}", coords.moduli(), coords.order());

    let theta = vec![BigInt::from(1); tree.complement(&b).len()];
    let c = flow::extend_to_conservative(&b, &tree, &theta).unwrap();
    println!("conservative extension of all-ones: {:?}", c.values);
    println!("conservative: {}", flow::is_conservative(&b, &c).unwrap());

    let fired = flow::fire_index(&b, &c, 0).unwrap();
    println!("after firing the first edge: {:?}", fired.values);
    println!("still equivalent: {}", flow::equivalent(&b, &c, &fired).unwrap());
    println!("class {} = {}", coords.to_group_element(&b, &c).unwrap(), coords.to_group_element(&b, &fired).unwrap());

    let unit = Configuration::unit(&b, 1, 3);
    println!("unit flow on edge 3 conservative: {}", flow::is_conservative(&b, &unit).unwrap());
}
