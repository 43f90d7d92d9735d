use std::collections::BTreeSet;

use crate::config::{ConfigError, InstanceConfig, MAX_WALKING, WALK_SPEED};

/// For each attribute, the indices of the attributes its expression or
/// constraints read. `stops(..)` implicitly reads the walking attributes.
pub fn attribute_dependencies(cfg: &InstanceConfig) -> Vec<BTreeSet<usize>> {
    cfg.attributes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut names = BTreeSet::new();
            let exprs = a.expression().into_iter().chain(a.constraints.iter().map(|c| &c.expr));
            for e in exprs {
                names.extend(e.dependencies());
                if e.called_functions().contains("stops") {
                    names.insert(MAX_WALKING.to_string());
                    names.insert(WALK_SPEED.to_string());
                }
            }
            names
                .iter()
                .filter_map(|n| cfg.attribute_index(n))
                .filter(|&j| j != i)
                .collect()
        })
        .collect()
}

/// Kahn's algorithm; among ready attributes the earliest declared goes first.
pub fn topological_order(names: &[String], deps: &[BTreeSet<usize>]) -> Result<Vec<usize>, ConfigError> {
    let n = deps.len();
    let mut pending: Vec<usize> = deps.iter().map(BTreeSet::len).collect();
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, d) in deps.iter().enumerate() {
        for &j in d {
            users[j].push(i);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &u in &users[i] {
            pending[u] -= 1;
            if pending[u] == 0 {
                ready.insert(u);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // walk unresolved dependencies until a node repeats
    let stuck: BTreeSet<usize> = (0..n).filter(|i| !order.contains(i)).collect();
    let mut path = vec![*stuck.first().unwrap()];
    loop {
        let cur = *path.last().unwrap();
        let next = *deps[cur].iter().find(|j| stuck.contains(j)).unwrap();
        if let Some(pos) = path.iter().position(|&p| p == next) {
            let mut cycle: Vec<String> = path[pos..].iter().map(|&k| names[k].clone()).collect();
            cycle.push(names[next].clone());
            return Err(ConfigError::CyclicDependency(cycle));
        }
        path.push(next);
    }
}

pub fn build_attribute_order(cfg: &InstanceConfig) -> Result<Vec<usize>, ConfigError> {
    let names: Vec<String> = cfg.attributes.iter().map(|a| a.name.clone()).collect();
    topological_order(&names, &attribute_dependencies(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg(attrs: &str) -> InstanceConfig {
        parse_config(&format!(r#"{{"network": "g", "seed": 1, "requests": 1, "attributes": [{attrs}]}}"#)).unwrap()
    }

    fn names(c: &InstanceConfig) -> Vec<String> {
        build_attribute_order(c)
            .unwrap()
            .into_iter()
            .map(|i| c.attributes[i].name.clone())
            .collect()
    }

    #[test]
    fn chain() {
        let c = cfg(r#"
            {"name": "latest_arrival", "type": "integer", "expression": "earliest_arrival + 1800"},
            {"name": "earliest_arrival", "type": "integer", "expression": "earliest_departure + 600"},
            {"name": "earliest_departure", "type": "integer", "pdf": {"type": "normal", "loc": 30600, "scale": 3600}}"#);
        assert_eq!(names(&c), ["earliest_departure", "earliest_arrival", "latest_arrival"]);
    }

    #[test]
    fn declaration_order_for_independent() {
        let c = cfg(r#"
            {"name": "c", "type": "integer", "expression": "1"},
            {"name": "a", "type": "integer", "expression": "2"},
            {"name": "b", "type": "integer", "expression": "3"}"#);
        assert_eq!(names(&c), ["c", "a", "b"]);
    }

    #[test]
    fn constraint_only_dependency() {
        let c = cfg(r#"
            {"name": "a", "type": "integer", "expression": "1", "constraints": ["a < b"]},
            {"name": "c", "type": "integer", "expression": "1"},
            {"name": "b", "type": "integer", "expression": "2"}"#);
        assert_eq!(names(&c), ["c", "b", "a"]);
    }

    #[test]
    fn two_cycle() {
        let c = cfg(r#"
            {"name": "a", "type": "integer", "expression": "b + 1"},
            {"name": "b", "type": "integer", "expression": "a + 1"}"#);
        match build_attribute_order(&c) {
            Err(ConfigError::CyclicDependency(cycle)) => assert_eq!(cycle, ["a", "b", "a"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stops_reads_walking_attributes() {
        let c = cfg(r#"
            {"name": "origin", "type": "location"},
            {"name": "s", "type": "array_primitives", "expression": "stops(origin)"},
            {"name": "max_walking", "type": "integer", "pdf": {"type": "uniform", "loc": 300, "scale": 300}}"#);
        assert_eq!(names(&c), ["origin", "max_walking", "s"]);
    }
}
