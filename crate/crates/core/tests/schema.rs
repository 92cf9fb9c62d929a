use synthvid_core::GeneratorConfig;

fn schema() -> serde_json::Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/config.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn schema_lists_exactly_the_config_keys_with_their_defaults() {
    let schema = schema();
    let props = schema["properties"].as_object().unwrap();
    let defaults = serde_json::to_value(GeneratorConfig::default()).unwrap();
    let keys = defaults.as_object().unwrap();
    let mut a: Vec<&String> = props.keys().collect();
    let mut b: Vec<&String> = keys.keys().collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
    for (key, value) in keys {
        assert_eq!(&props[key]["default"], value, "default of {key}");
    }
}

#[test]
fn schema_level_names_parse() {
    for level in schema()["properties"]["level"]["enum"].as_array().unwrap() {
        let json = format!("{{\"level\": {level}}}");
        let cfg = GeneratorConfig::from_json_str(&json).unwrap();
        assert_eq!(serde_json::to_value(cfg.level).unwrap(), *level);
    }
}

#[test]
fn schema_shapes_of_tagged_fields_parse() {
    let json = r#"{
        "level": "textured_shapes",
        "background": {"pool_image": "bg"},
        "texture_source": {"saturated": {"static_pool": "tex"}},
        "mixture": [
            {"source": "generator", "ratio": 0.9},
            {"source": {"static_images": {"path": "imgs", "frames": 16}}, "ratio": 0.05},
            {"source": {"real_videos": {"path": "vids"}}, "ratio": 0.05}
        ],
        "dataset_size": 9537,
        "pool_limit": 100
    }"#;
    let cfg = GeneratorConfig::from_json_str(json).unwrap();
    assert_eq!(cfg.dataset_size.fixed(), Some(9537));
    assert_eq!(cfg.mixture.len(), 3);
    assert!(GeneratorConfig::from_json_str(r#"{"no_such_key": 1}"#).is_err());
}
