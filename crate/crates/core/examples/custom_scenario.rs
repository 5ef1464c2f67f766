//! Builds a scenario from TOML text, plans it and checks the result with the
//! independent path verifier.

use larrt::defrag::defragment;
use larrt::pathfile::{format_path, verify_path};
use larrt::planner::plan;
use larrt::scenario::parse_scenario;

const TEXT: &str = r#"
schema = 1

[meta]
name = "gate"
best_known_actions = 2
source = "derived"
time_budget_s = 2.0

[space]
dims = 2
factors = [[0], [1]]
bounds = [[0.0, 4.0], [-1.5708, 0.0]]
names = ["cart_x", "gate_angle"]

[[bodies]]
name = "cart"
half_extents = [0.3, 0.3]
kind = "movable"

[[bodies]]
name = "gate"
half_extents = [0.05, 0.8]
pose = [2.0, 0.8, 0.0]
kind = "movable"

[[bindings]]
body = "cart"
joints = [{ index = 0, type = "prismatic", axis = [1.0, 0.0] }]

[[bindings]]
body = "gate"
joints = [{ index = 1, type = "revolute", anchor = [2.0, 1.6] }]

[start]
values = [0.0, 0.0]

[goal]
indices = [0]
values = [4.0]
epsilon = 0.05
"#;

fn main() -> larrt::Result<()> {
    let sc = parse_scenario(TEXT, "gate.toml")?;
    let result = plan(&sc.scene, &sc.start, &sc.goal, &sc.planner_config(1))?;
    let path = result.best_path.expect("no solution within the budget");
    let path = defragment(&path, &sc.scene, &sc.goal);
    match verify_path(&sc.scene, &sc.start, &sc.goal, &path) {
        Ok(cost) => println!("verified {cost}"),
        Err(e) => println!("rejected: {e}"),
    }
    print!("{}", format_path(&path));
    Ok(())
}
