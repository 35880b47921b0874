use std::collections::BTreeSet;
use std::path::PathBuf;

use serde_json::Value;

use scenegraph_core::harness::{generate_corpus, SyntheticConfig};
use scenegraph_core::numerics::{ParamStore, Tensor};
use scenegraph_core::weaksg::{parse_templated, Lexicon, TOY_CORPUS};
use scenegraph_tools::formats::{
    read_json, to_json, write_json, Checkpoint, SceneGraphFile, SrlDocumentFile, Table,
};
use scenegraph_tools::ToolError;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn small_corpus() -> Vec<scenegraph_core::harness::SyntheticSample> {
    generate_corpus(&SyntheticConfig { samples: 6, seed: 11, ..SyntheticConfig::default() }).unwrap()
}

#[test]
fn visual_graph_round_trip_is_exact() {
    let lex = Lexicon::default();
    for (i, s) in small_corpus().iter().enumerate() {
        let file = SceneGraphFile::from_scene_graph(&format!("g{i}"), &s.graph, Some(&lex));
        let text = to_json(&file);
        let back: SceneGraphFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_scene_graph().unwrap(), s.graph);
        assert_eq!(to_json(&back), text);
    }
}

#[test]
fn pseudo_graph_round_trip() {
    let lex = Lexicon::default();
    for (id, text) in TOY_CORPUS {
        let doc = parse_templated(id, text, &lex).unwrap();
        let g = scenegraph_core::weaksg::build_pseudo_graph(&scenegraph_core::weaksg::merge_coreferent(&doc), &lex);
        let file = SceneGraphFile::from_pseudo_graph(&g);
        assert!(file.entities.iter().all(|e| e.feature.is_none() && e.bbox.is_none() && e.class.is_none()));
        let back: SceneGraphFile = serde_json::from_str(&to_json(&file)).unwrap();
        assert_eq!(back.to_pseudo_graph().unwrap(), g);
    }
}

#[test]
fn srl_document_round_trip() {
    let lex = Lexicon::default();
    for (id, text) in TOY_CORPUS {
        let doc = parse_templated(id, text, &lex).unwrap();
        let file = SrlDocumentFile::from_document(&doc);
        let back: SrlDocumentFile = serde_json::from_str(&to_json(&file)).unwrap();
        assert_eq!(back.to_document().unwrap(), doc);
    }
}

#[test]
fn shipped_toy_documents_match_the_parser() {
    let lex = Lexicon::default();
    for (id, text) in TOY_CORPUS {
        let path = crate_dir().join(format!("data/toy/srl/{id}.json"));
        let on_disk = std::fs::read_to_string(&path).unwrap();
        let doc = parse_templated(id, text, &lex).unwrap();
        assert_eq!(on_disk, to_json(&SrlDocumentFile::from_document(&doc)), "{}", path.display());
    }
}

#[test]
fn unknown_fields_and_wrong_headers_are_rejected() {
    let lex = Lexicon::default();
    let s = &small_corpus()[0];
    let mut v: Value = serde_json::to_value(SceneGraphFile::from_scene_graph("g", &s.graph, Some(&lex))).unwrap();
    v["colour"] = Value::from("red");
    assert!(serde_json::from_value::<SceneGraphFile>(v.clone()).is_err());

    v.as_object_mut().unwrap().remove("colour");
    v["version"] = Value::from(2);
    let file: SceneGraphFile = serde_json::from_value(v.clone()).unwrap();
    assert!(matches!(file.to_scene_graph(), Err(ToolError::Format(_))));

    v["version"] = Value::from(1);
    v["triplets"][0]["o"] = Value::from(999);
    let file: SceneGraphFile = serde_json::from_value(v).unwrap();
    assert!(file.to_scene_graph().is_err());
}

#[test]
fn visual_graph_without_features_is_a_format_error() {
    let s = &small_corpus()[0];
    let mut file = SceneGraphFile::from_scene_graph("g", &s.graph, None);
    file.entities[0].feature = None;
    assert!(matches!(file.to_scene_graph(), Err(ToolError::Format(_))));
    let pseudo = SceneGraphFile::from_scene_graph("g", &s.graph, None);
    // no labels without a lexicon, and no explicit edges
    assert!(pseudo.to_pseudo_graph().is_err());
}

/// Property names the serializer can emit at each level must be exactly the
/// ones the schema declares.
fn schema_keys(schema: &Value, pointer: &str) -> BTreeSet<String> {
    schema.pointer(pointer).unwrap().as_object().unwrap().keys().cloned().collect()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn scene_graph_schema_matches_the_serializer() {
    let schema: Value = read_json(&crate_dir().join("schemas/scene_graph.schema.json")).unwrap();
    assert_eq!(schema["properties"]["format"]["const"], "scene-graph");
    assert_eq!(schema["properties"]["version"]["const"], 1);

    let lex = Lexicon::default();
    let visual = serde_json::to_value(SceneGraphFile::from_scene_graph("g", &small_corpus()[0].graph, Some(&lex))).unwrap();
    let doc = parse_templated("d", TOY_CORPUS[0].1, &lex).unwrap();
    let g = scenegraph_core::weaksg::build_pseudo_graph(&doc, &lex);
    let pseudo = serde_json::to_value(SceneGraphFile::from_pseudo_graph(&g)).unwrap();

    let top = schema_keys(&schema, "/properties");
    assert_eq!(keys(&pseudo), top);
    assert!(keys(&visual).is_subset(&top));
    let required: BTreeSet<String> =
        schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert!(required.is_subset(&keys(&visual)));

    let ent = schema_keys(&schema, "/properties/entities/items/properties");
    let pred = schema_keys(&schema, "/properties/predicates/items/properties");
    assert_eq!(keys(&visual["entities"][0]), ent);
    assert_eq!(keys(&visual["predicates"][0]), pred);
    assert_eq!(keys(&visual["triplets"][0]), schema_keys(&schema, "/properties/triplets/items/properties"));
    assert_eq!(keys(&pseudo["edges"][0]), schema_keys(&schema, "/properties/edges/items/properties"));
    assert_eq!(visual["entities"][0]["bbox"].as_array().unwrap().len(), 4);
}

#[test]
fn srl_schema_matches_the_serializer() {
    let schema: Value = read_json(&crate_dir().join("schemas/srl_document.schema.json")).unwrap();
    assert_eq!(schema["properties"]["format"]["const"], "srl-document");
    let doc = parse_templated("d", TOY_CORPUS[2].1, &Lexicon::default()).unwrap();
    let v = serde_json::to_value(SrlDocumentFile::from_document(&doc)).unwrap();
    assert_eq!(keys(&v), schema_keys(&schema, "/properties"));
    assert_eq!(keys(&v["frames"][0]), schema_keys(&schema, "/properties/frames/items/properties"));
    assert_eq!(keys(&v["frames"][0]["arguments"]["V"]), schema_keys(&schema, "/$defs/span/properties"));
    assert_eq!(keys(&v["coref_clusters"][0][0]), schema_keys(&schema, "/$defs/span/properties"));
}

#[test]
fn checkpoint_round_trip_and_shape_checks() {
    let mut store = ParamStore::new();
    let sa = store.add("a", Tensor::new(vec![2, 3], vec![1.0, -2.5, 3.25, 0.0, 1e-300, -7.0]).unwrap());
    store.add("b", Tensor::new(vec![1], vec![std::f64::consts::PI]).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.json");
    write_json(&path, &Checkpoint::from_store(&store)).unwrap();
    let ck: Checkpoint = read_json(&path).unwrap();

    let mut fresh = ParamStore::new();
    let a = fresh.add("a", Tensor::zeros(&[2, 3]));
    let b = fresh.add("b", Tensor::zeros(&[1]));
    assert_eq!(ck.restore(&mut fresh, true).unwrap(), 2);
    assert_eq!(fresh.value(a), store.value(sa));
    assert_eq!(fresh.value(b).data()[0].to_bits(), std::f64::consts::PI.to_bits());

    let mut partial = ParamStore::new();
    partial.add("a", Tensor::zeros(&[2, 3]));
    partial.add("extra", Tensor::zeros(&[2]));
    assert!(ck.restore(&mut partial, true).is_err());
    assert_eq!(ck.restore(&mut partial, false).unwrap(), 1);

    let mut wrong = ParamStore::new();
    wrong.add("a", Tensor::zeros(&[3, 2]));
    assert!(ck.restore(&mut wrong, false).is_err());
}

#[test]
fn tables_round_trip_through_disk() {
    let mut t = Table::new(["name", "value"]);
    t.push(["x", "0.500000"]);
    t.push(["y", "na"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tsv");
    t.write(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "name\tvalue\nx\t0.500000\ny\tna\n");
    let back = Table::read(&path).unwrap();
    assert_eq!(back.render(), t.render());
    assert_eq!(back.column("value"), Some(1));
    assert_eq!(back.column("missing"), None);
}
