use drivesim::geo::{haversine_gcd, NodeId};
use drivesim::osm::{import_osm, ImportOptions, OsmError};

fn doc(ways: &str) -> String {
    format!(
        r#"<?xml version="1.0" encoding="UTF-8"?>
<osm version="0.6" generator="fixture">
  <bounds minlat="52.5" minlon="13.4" maxlat="52.52" maxlon="13.42"/>
  <node id="101" lat="52.5000" lon="13.4000"/>
  <node id="102" lat="52.5010" lon="13.4000"/>
  <node id="103" lat="52.5010" lon="13.4015"/>
  <node id="104" lat="52.5100" lon="13.4100"/>
{ways}
</osm>
"#
    )
}

fn way(id: i64, refs: &[i64], tags: &[(&str, &str)]) -> String {
    let mut s = format!("  <way id=\"{id}\">\n");
    for r in refs {
        s += &format!("    <nd ref=\"{r}\"/>\n");
    }
    for (k, v) in tags {
        s += &format!("    <tag k=\"{k}\" v=\"{v}\"/>\n");
    }
    s + "  </way>"
}

fn import(xml: &str) -> Result<drivesim::osm::OsmNetwork, OsmError> {
    import_osm(xml.as_bytes(), &ImportOptions::default())
}

fn arcs(g: &drivesim::Network) -> Vec<(u32, u32)> {
    let mut v: Vec<_> = g.edges().iter().map(|e| (e.from.0, e.to.0)).collect();
    v.sort();
    v
}

#[test]
fn two_way_street_gives_both_directions() {
    let net = import(&doc(&way(1, &[101, 102, 103], &[("highway", "residential"), ("maxspeed", "50")]))).unwrap();
    assert_eq!(net.graph.node_count(), 3);
    assert_eq!(arcs(&net.graph), vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
    assert!(net.graph.edges().iter().all(|e| (e.v_max.unwrap() - 50.0 / 3.6).abs() < 1e-12));
    assert_eq!(net.edge_way, vec![1; 4]);
    assert_eq!(net.report.nodes_extracted, 4);
    assert_eq!(net.report.ways_extracted, 1);
    assert_eq!(net.report.edges_missing_vmax, 0);
    assert!(net.graph.is_enhanced());
}

#[test]
fn edge_lengths_match_haversine() {
    let net = import(&doc(&way(1, &[101, 102], &[("highway", "residential")]))).unwrap();
    let g = &net.graph;
    let e = &g.edges()[0];
    let expected = haversine_gcd(g.node(e.from), g.node(e.to));
    assert!((e.gcd.unwrap() - expected).abs() < 1e-9);
    // One thousandth of a degree of latitude.
    assert!((expected - 111.19).abs() < 0.1, "{expected}");
}

#[test]
fn oneway_yes_keeps_way_order() {
    let net = import(&doc(&way(2, &[101, 102, 103], &[("highway", "primary"), ("oneway", "yes")]))).unwrap();
    let g = &net.graph;
    assert_eq!(g.edge_count(), 2);
    for e in g.edges() {
        assert_eq!(e.to.0, e.from.0 + 1);
    }
    assert_eq!(net.report.edges_missing_vmax, 2);
}

#[test]
fn oneway_minus_one_reverses() {
    let net = import(&doc(&way(3, &[101, 102, 103], &[("highway", "secondary"), ("oneway", "-1")]))).unwrap();
    let g = &net.graph;
    assert_eq!(g.edge_count(), 2);
    // Node ids follow the reversed order: 103 first.
    let first = g.node(NodeId(0));
    assert!((first.lon() - 13.4015).abs() < 1e-12);
    for e in g.edges() {
        assert_eq!(e.to.0, e.from.0 + 1);
    }
}

#[test]
fn footway_only_is_an_empty_network() {
    let xml = doc(&way(4, &[101, 102, 103], &[("highway", "footway")]));
    assert!(matches!(import(&xml), Err(OsmError::EmptyNetwork)));
    let xml = doc(&way(4, &[101, 102], &[("name", "no highway tag")]));
    assert!(matches!(import(&xml), Err(OsmError::EmptyNetwork)));
}

#[test]
fn maxspeed_units() {
    let cases = [("36", 10.0), ("30 mph", 30.0 * 1.609344 / 3.6), ("RU:urban", 13.9), ("none", 13.9)];
    for (raw, expected) in cases {
        let net = import(&doc(&way(5, &[101, 102], &[("highway", "tertiary"), ("maxspeed", raw)]))).unwrap();
        for e in net.graph.edges() {
            assert!((e.v_max.unwrap() - expected).abs() < 1e-9, "{raw}: {:?}", e.v_max);
        }
    }
}

#[test]
fn dangling_refs_are_counted_and_skipped() {
    let net = import(&doc(&way(6, &[101, 999, 102, 103], &[("highway", "residential")]))).unwrap();
    assert_eq!(net.report.refs_dangling, 1);
    // 101 is cut off from the rest and drops out with its component.
    assert_eq!(net.graph.node_count(), 2);
    assert_eq!(net.graph.edge_count(), 2);
}

#[test]
fn mixed_file_counts_each_rejection() {
    let ways = [
        way(1, &[101, 102], &[("highway", "residential")]),
        way(2, &[102, 103], &[("highway", "cycleway")]),
        way(3, &[103, 104], &[("building", "yes")]),
        way(4, &[102, 103], &[("highway", "service"), ("oneway", "yes")]),
    ]
    .join("\n");
    let net = import(&doc(&ways)).unwrap();
    assert_eq!(net.report.ways_extracted, 2);
    assert_eq!(net.report.ways_skipped_type, 1);
    assert_eq!(net.report.ways_skipped_unknown_type, 1);
    assert_eq!(net.graph.edge_count(), 3);
    assert_eq!(net.graph.node_count(), 3);
}

#[test]
fn custom_drivable_list() {
    let xml = doc(&way(1, &[101, 102], &[("highway", "footway")]));
    let opts = ImportOptions { drivable: vec!["footway".into()], ..ImportOptions::default() };
    assert_eq!(import_osm(xml.as_bytes(), &opts).unwrap().graph.edge_count(), 2);
}

#[test]
fn malformed_xml_is_a_parse_error() {
    let xml = doc(&way(1, &[101, 102], &[("highway", "residential")])).replace("</osm>", "");
    assert!(matches!(import(&xml), Err(OsmError::Parse { .. })));
}
