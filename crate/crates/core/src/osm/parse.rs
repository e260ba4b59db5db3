use std::collections::BTreeMap;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::osm::OsmError;

#[derive(Clone, Debug, PartialEq)]
pub enum RawOsmEntity {
    Node { osm_id: i64, lat: f64, lon: f64 },
    Way { osm_id: i64, refs: Vec<i64>, tags: BTreeMap<String, String> },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedOsm {
    pub entities: Vec<RawOsmEntity>,
    /// `<node>` elements without usable coordinates.
    pub nodes_skipped: usize,
    /// `<way>` elements with fewer than two node references.
    pub ways_too_short: usize,
}

struct OpenWay {
    osm_id: Option<i64>,
    refs: Vec<i64>,
    tags: BTreeMap<String, String>,
}

fn attr(e: &BytesStart<'_>, key: &[u8]) -> Result<Option<String>, String> {
    for a in e.attributes() {
        let a = a.map_err(|err| err.to_string())?;
        if a.key.as_ref() == key {
            let v = a.unescape_value().map_err(|err| err.to_string())?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

/// Streams an OSM-XML document and extracts nodes and ways. Everything else
/// (relations, bounds, metadata attributes) is skipped.
pub fn parse_osm_xml(bytes: &[u8]) -> Result<ParsedOsm, OsmError> {
    let mut reader = Reader::from_reader(bytes);
    let mut buf = Vec::new();
    let mut out = ParsedOsm::default();
    let mut open: Vec<Vec<u8>> = Vec::new();
    let mut way: Option<OpenWay> = None;

    loop {
        let pos = reader.buffer_position();
        let err = |message: String| OsmError::Parse { offset: pos, message };
        let event = reader.read_event_into(&mut buf).map_err(|e| err(e.to_string()))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = e.name().as_ref().to_vec();
                match name.as_slice() {
                    b"node" => {
                        let id = attr(e, b"id").map_err(&err)?.and_then(|v| v.parse::<i64>().ok());
                        let lat = attr(e, b"lat").map_err(&err)?.and_then(|v| v.parse::<f64>().ok());
                        let lon = attr(e, b"lon").map_err(&err)?.and_then(|v| v.parse::<f64>().ok());
                        match (id, lat, lon) {
                            (Some(osm_id), Some(lat), Some(lon))
                                if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) =>
                            {
                                out.entities.push(RawOsmEntity::Node { osm_id, lat, lon })
                            }
                            _ => out.nodes_skipped += 1,
                        }
                    }
                    b"way" => {
                        let osm_id = attr(e, b"id").map_err(&err)?.and_then(|v| v.parse::<i64>().ok());
                        way = Some(OpenWay { osm_id, refs: Vec::new(), tags: BTreeMap::new() });
                        if is_empty {
                            finish_way(&mut way, &mut out);
                        }
                    }
                    b"nd" => {
                        if let Some(w) = way.as_mut() {
                            if let Some(r) = attr(e, b"ref").map_err(&err)?.and_then(|v| v.parse::<i64>().ok()) {
                                w.refs.push(r);
                            }
                        }
                    }
                    b"tag" => {
                        if let Some(w) = way.as_mut() {
                            if let (Some(k), Some(v)) = (attr(e, b"k").map_err(&err)?, attr(e, b"v").map_err(&err)?) {
                                w.tags.insert(k, v);
                            }
                        }
                    }
                    _ => {}
                }
                if !is_empty {
                    open.push(name);
                }
            }
            Event::End(e) => {
                let name = e.name().as_ref().to_vec();
                if open.pop().as_deref() != Some(name.as_slice()) {
                    return Err(err(format!("unexpected closing tag </{}>", String::from_utf8_lossy(&name))));
                }
                if name == b"way" {
                    finish_way(&mut way, &mut out);
                }
            }
            Event::Eof => {
                if let Some(name) = open.last() {
                    return Err(OsmError::Parse {
                        offset: reader.buffer_position(),
                        message: format!("unclosed element <{}>", String::from_utf8_lossy(name)),
                    });
                }
                break;
            }
            _ => {}
        }
        buf.clear();
    }
    Ok(out)
}

fn finish_way(way: &mut Option<OpenWay>, out: &mut ParsedOsm) {
    if let Some(w) = way.take() {
        match w.osm_id {
            Some(osm_id) if w.refs.len() >= 2 => {
                out.entities.push(RawOsmEntity::Way { osm_id, refs: w.refs, tags: w.tags })
            }
            _ => out.ways_too_short += 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_ways_are_extracted() {
        let xml = br#"<?xml version="1.0"?>
<osm version="0.6">
  <node id="1" lat="0.0" lon="0.0"/>
  <node id="2" lat="0.0" lon="0.001" version="3"><tag k="name" v="x"/></node>
  <way id="10"><nd ref="1"/><nd ref="2"/><tag k="highway" v="residential"/></way>
</osm>"#;
        let p = parse_osm_xml(xml).unwrap();
        assert_eq!(p.entities.len(), 3);
        match &p.entities[2] {
            RawOsmEntity::Way { osm_id, refs, tags } => {
                assert_eq!(*osm_id, 10);
                assert_eq!(refs, &vec![1, 2]);
                assert_eq!(tags.get("highway").map(String::as_str), Some("residential"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn relations_are_ignored() {
        let xml = br#"<osm><node id="1" lat="1" lon="1"/><relation id="5"><member type="node" ref="1" role=""/><tag k="type" v="route"/></relation></osm>"#;
        let p = parse_osm_xml(xml).unwrap();
        assert_eq!(p.entities.len(), 1);
    }

    #[test]
    fn unclosed_tag_is_a_parse_error() {
        let xml = br#"<osm><node id="1" lat="1" lon="1"/><way id="3"><nd ref="1"/>"#;
        assert!(matches!(parse_osm_xml(xml), Err(OsmError::Parse { .. })));
    }

    #[test]
    fn mismatched_close_is_a_parse_error() {
        let xml = br#"<osm><way id="3"></node></osm>"#;
        assert!(matches!(parse_osm_xml(xml), Err(OsmError::Parse { .. })));
    }

    #[test]
    fn node_without_coordinates_is_counted() {
        let xml = br#"<osm><node id="1" lat="1"/><node id="2" lat="1" lon="2"/></osm>"#;
        let p = parse_osm_xml(xml).unwrap();
        assert_eq!(p.entities.len(), 1);
        assert_eq!(p.nodes_skipped, 1);
    }

    #[test]
    fn escaped_tag_values_are_unescaped() {
        let xml = br#"<osm><way id="1"><nd ref="1"/><nd ref="2"/><tag k="name" v="A &amp; B"/></way></osm>"#;
        let p = parse_osm_xml(xml).unwrap();
        let RawOsmEntity::Way { tags, .. } = &p.entities[0] else { panic!() };
        assert_eq!(tags["name"], "A & B");
    }
}
