//! The vendored base protocol must stay field-for-field identical to the
//! public interface, and its block enum identical to the shipped schema file.

use std::collections::BTreeMap;

use evocraft_core::block::{block_schema, BLOCK_SCHEMA_CSV, BLOCK_TYPE_COUNT};
use evocraft_core::{BlockType, Orientation};
use evocraft_server::pb::base;
use evocraft_server::{BASE_PROTO, SIM_PROTO};

#[derive(Debug, Default)]
struct Proto {
    package: String,
    imports: Vec<String>,
    /// service -> [(rpc, request, response)]
    services: BTreeMap<String, Vec<(String, String, String)>>,
    /// message -> [(label + type, name, number)]
    messages: BTreeMap<String, Vec<(String, String, u32)>>,
    enums: BTreeMap<String, Vec<(String, i32)>>,
}

fn strip_comments(src: &str) -> String {
    let mut out = String::new();
    let mut rest = src;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("//") {
            rest = r.find('\n').map_or("", |i| &r[i..]);
        } else if let Some(r) = rest.strip_prefix("/*") {
            rest = r.find("*/").map_or("", |i| &r[i + 2..]);
        } else {
            let c = rest.chars().next().unwrap();
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

fn tokens(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in strip_comments(src).chars() {
        if c.is_whitespace() || "{}();=".contains(c) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    out
}

fn parse(src: &str) -> Proto {
    let t = tokens(src);
    let mut p = Proto::default();
    let mut i = 0;
    let block_end = |mut j: usize| {
        while t[j] != "}" {
            j += 1;
        }
        j
    };
    while i < t.len() {
        match t[i].as_str() {
            "package" => {
                p.package = t[i + 1].clone();
                i += 3;
            }
            "import" => {
                p.imports.push(t[i + 1].trim_matches('"').to_string());
                i += 3;
            }
            "service" => {
                let name = t[i + 1].clone();
                let end = block_end(i + 3);
                let mut rpcs = Vec::new();
                let mut j = i + 3;
                while j < end {
                    assert_eq!(t[j], "rpc", "unexpected token in service: {}", t[j]);
                    // rpc name ( Req ) returns ( Resp ) ;
                    rpcs.push((t[j + 1].clone(), t[j + 3].clone(), t[j + 7].clone()));
                    j += 10;
                }
                p.services.insert(name, rpcs);
                i = end + 1;
            }
            "message" => {
                let name = t[i + 1].clone();
                let end = block_end(i + 3);
                let mut fields = Vec::new();
                let mut j = i + 3;
                while j < end {
                    let (ty, k) = if t[j] == "repeated" { (format!("repeated {}", t[j + 1]), j + 2) } else { (t[j].clone(), j + 1) };
                    fields.push((ty, t[k].clone(), t[k + 2].parse().unwrap()));
                    j = k + 4;
                }
                p.messages.insert(name, fields);
                i = end + 1;
            }
            "enum" => {
                let name = t[i + 1].clone();
                let end = block_end(i + 3);
                let mut values = Vec::new();
                let mut j = i + 3;
                while j < end {
                    values.push((t[j].clone(), t[j + 2].parse().unwrap()));
                    j += 4;
                }
                p.enums.insert(name, values);
                i = end + 1;
            }
            _ => i += 1,
        }
    }
    p
}

fn fields(spec: &[(&str, &str, u32)]) -> Vec<(String, String, u32)> {
    spec.iter().map(|(t, n, k)| (t.to_string(), n.to_string(), *k)).collect()
}

pub fn base_service_matches_the_public_interface() {
    let p = parse(BASE_PROTO);
    assert_eq!(p.package, "dk.itu.real.ooe");
    assert_eq!(p.imports, vec!["google/protobuf/empty.proto"]);
    assert_eq!(p.services.len(), 1);
    let rpcs = &p.services["MinecraftService"];
    let expected: Vec<(String, String, String)> = [
        ("spawnBlocks", "Blocks", "google.protobuf.Empty"),
        ("readCube", "Cube", "Blocks"),
        ("fillCube", "FillCubeRequest", "google.protobuf.Empty"),
    ]
    .iter()
    .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
    .collect();
    assert_eq!(rpcs, &expected);

    let expected_messages: BTreeMap<String, Vec<(String, String, u32)>> = [
        ("Point", fields(&[("int32", "x", 1), ("int32", "y", 2), ("int32", "z", 3)])),
        ("Block", fields(&[("Point", "position", 1), ("BlockType", "type", 2), ("Orientation", "orientation", 3)])),
        ("Blocks", fields(&[("repeated Block", "blocks", 1)])),
        ("Cube", fields(&[("Point", "min", 1), ("Point", "max", 2)])),
        ("FillCubeRequest", fields(&[("Cube", "cube", 1), ("BlockType", "type", 2)])),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    assert_eq!(p.messages, expected_messages);

    let orientations: Vec<(String, i32)> =
        ["NORTH", "WEST", "SOUTH", "EAST", "UP", "DOWN"].iter().enumerate().map(|(i, n)| (n.to_string(), i as i32)).collect();
    assert_eq!(p.enums["Orientation"], orientations);
    assert_eq!(p.enums.len(), 2);
}

pub fn block_enum_matches_the_schema_file() {
    let p = parse(BASE_PROTO);
    let from_proto = &p.enums["BlockType"];
    assert_eq!(from_proto.len(), BLOCK_TYPE_COUNT);
    let from_csv: Vec<(String, i32)> = BLOCK_SCHEMA_CSV
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut cols = l.split(',');
            let id = cols.next().unwrap().parse().unwrap();
            (cols.next().unwrap().to_string(), id)
        })
        .collect();
    assert_eq!(from_proto, &from_csv);
    let mut names: Vec<&String> = from_csv.iter().map(|(n, _)| n).collect();
    let sorted = {
        let mut s = names.clone();
        s.sort();
        s
    };
    assert_eq!(names, sorted, "ids follow alphabetical order");
    names.dedup();
    assert_eq!(names.len(), BLOCK_TYPE_COUNT);
}

pub fn generated_enums_agree_with_core_types() {
    for info in block_schema() {
        let wire = base::BlockType::from_str_name(&info.name).unwrap_or_else(|| panic!("{} missing from wire enum", info.name));
        assert_eq!(wire as i32, i32::from(info.id));
        assert_eq!(BlockType::from_id(wire as i32).unwrap().name(), info.name);
    }
    for o in Orientation::ALL {
        assert_eq!(base::Orientation::from_str_name(o.name()).unwrap() as i32, o.id());
    }
}

pub fn extensions_live_in_their_own_service() {
    let p = parse(SIM_PROTO);
    assert_ne!(p.package, "dk.itu.real.ooe");
    assert!(!p.services.contains_key("MinecraftService"));
    let rpcs: Vec<&str> = p.services["SimulationService"].iter().map(|r| r.0.as_str()).collect();
    assert_eq!(rpcs, ["Step", "Reset", "SetTickRate", "CenterOfMass"]);
}
