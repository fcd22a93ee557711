//! Structure of the emitted SVG, checked by parsing it as XML.

use std::collections::{HashMap, HashSet};

use classsplom::data::generate_gaussian_blobs;
use classsplom::evaluation::{roc_curve, BootstrapRocSummary, RocCurve};
use classsplom::nalgebra::{DMatrix, DVector};
use classsplom::pipeline::{build_model, RunConfig};
use classsplom::projection::{LinearAxis, PairProjection};
use classsplom::render::{default_palette, render_classsplom, render_roc_cell, render_scatter_cell, RenderOptions, BACKGROUND_GREY};

fn model(k: usize, bootstrap: usize) -> classsplom::Model {
    let means = DMatrix::from_fn(k, 6, |i, j| if i == j { 5.0 } else { 0.0 });
    let ds = generate_gaussian_blobs(&means, &vec![1.0; k], 25, 11).unwrap();
    let mut config = RunConfig::new("unused.csv", "unused.svg", "unused.json");
    config.bootstrap = bootstrap;
    build_model(&ds, None, &config).unwrap()
}

fn wrap(fragment: &str) -> String {
    format!(r#"<svg xmlns="http://www.w3.org/2000/svg">{fragment}</svg>"#)
}

fn class_count(doc: &roxmltree::Document, class: &str) -> usize {
    doc.descendants().filter(|n| n.attribute("class") == Some(class)).count()
}

fn parse_points(points: &str) -> Vec<(f64, f64)> {
    points
        .split_whitespace()
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn five_class_grid_structure() {
    let m = model(5, 10);
    let svg = render_classsplom(&m, &RenderOptions::default()).unwrap();
    let doc = roxmltree::Document::parse(svg.as_str()).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("width"), Some("800"));
    assert_eq!(root.attribute("height"), Some("800"));
    assert_eq!(class_count(&doc, "class-disc"), 5);
    assert_eq!(class_count(&doc, "scatter-cell"), 10);
    assert_eq!(class_count(&doc, "roc-cell"), 10);

    let mut pair_at: HashMap<(usize, usize), String> = HashMap::new();
    for cell in doc.descendants().filter(|n| n.attribute("class") == Some("cell")) {
        let row: usize = cell.attribute("data-row").unwrap().parse().unwrap();
        let col: usize = cell.attribute("data-col").unwrap().parse().unwrap();
        let expected = format!("translate({},{})", col * 160, row * 160);
        assert_eq!(cell.attribute("transform"), Some(expected.as_str()));
        let inner = cell.children().find(|c| c.is_element() && c.attribute("class") != Some("cell-border")).unwrap();
        let kind = inner.attribute("class").unwrap();
        match row.cmp(&col) {
            std::cmp::Ordering::Equal => assert_eq!(kind, "disc-cell"),
            std::cmp::Ordering::Greater => assert_eq!(kind, "scatter-cell"),
            std::cmp::Ordering::Less => assert_eq!(kind, "roc-cell"),
        }
        if let Some(pair) = inner.attribute("data-pair") {
            pair_at.insert((row, col), pair.to_string());
        }
    }
    assert_eq!(pair_at.len(), 20);
    for (&(r, c), pair) in &pair_at {
        assert_eq!(pair_at.get(&(c, r)), Some(pair), "cell ({r},{c}) not mirrored");
        let lo = r.min(c);
        let hi = r.max(c);
        assert_eq!(pair, &format!("{lo}-{hi}"));
    }

    let allowed: HashSet<&str> = m.palette.iter().map(String::as_str).chain([BACKGROUND_GREY]).collect();
    for pt in doc.descendants().filter(|n| n.has_tag_name("circle") && n.attribute("data-class").is_some()) {
        assert!(allowed.contains(pt.attribute("fill").unwrap()));
    }
}

#[test]
fn two_class_grid() {
    let m = model(2, 5);
    let svg = render_classsplom(&m, &RenderOptions::default()).unwrap();
    let doc = roxmltree::Document::parse(svg.as_str()).unwrap();
    assert_eq!(class_count(&doc, "class-disc"), 2);
    assert_eq!(class_count(&doc, "scatter-cell"), 1);
    assert_eq!(class_count(&doc, "roc-cell"), 1);
    let names: Vec<&str> = doc.descendants().filter(|n| n.has_tag_name("text")).filter_map(|n| n.text()).collect();
    assert!(names.contains(&"c0") && names.contains(&"c1"));
}

#[test]
fn rerendering_is_byte_identical() {
    let m = model(4, 8);
    let a = render_classsplom(&m, &RenderOptions::default()).unwrap();
    let b = render_classsplom(&m, &RenderOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_models_are_rejected() {
    let mut m = model(3, 3);
    m.pairs.pop();
    assert!(render_classsplom(&m, &RenderOptions::default()).is_err());
    let mut m = model(3, 3);
    m.palette[1] = m.palette[0].clone();
    assert!(render_classsplom(&m, &RenderOptions::default()).is_err());
    let m = model(3, 3);
    assert!(render_classsplom(&m, &RenderOptions::with_cell_size(0.0)).is_err());
}

#[test]
fn scatter_background_count_and_palette_swap() {
    let m = model(5, 2);
    let pp = &m.pair(1, 3).unwrap().projection;
    let palette = default_palette(5);
    let frag = render_scatter_cell(pp, &palette, 160.0);
    let frag_xml = wrap(&frag);
    let doc = roxmltree::Document::parse(&frag_xml).unwrap();
    let fills: Vec<(usize, String)> = doc
        .descendants()
        .filter(|n| n.has_tag_name("circle"))
        .map(|n| (n.attribute("data-class").unwrap().parse().unwrap(), n.attribute("fill").unwrap().to_string()))
        .collect();
    let n = pp.point_class.len();
    let pair_count = pp.point_class.iter().filter(|&&c| c == 1 || c == 3).count();
    assert_eq!(fills.iter().filter(|(_, f)| f == BACKGROUND_GREY).count(), n - pair_count);

    let mut swapped = palette.clone();
    swapped.swap(1, 3);
    let frag2 = render_scatter_cell(pp, &swapped, 160.0);
    let frag2_xml = wrap(&frag2);
    let doc2 = roxmltree::Document::parse(&frag2_xml).unwrap();
    let fills2: Vec<(usize, String)> = doc2
        .descendants()
        .filter(|n| n.has_tag_name("circle"))
        .map(|n| (n.attribute("data-class").unwrap().parse().unwrap(), n.attribute("fill").unwrap().to_string()))
        .collect();
    assert_eq!(fills.len(), fills2.len());
    for ((c1, f1), (c2, f2)) in fills.iter().zip(&fills2) {
        assert_eq!(c1, c2);
        match c1 {
            1 => assert_eq!((f1, f2), (&palette[1], &palette[3])),
            3 => assert_eq!((f1, f2), (&palette[3], &palette[1])),
            _ => assert_eq!(f1, f2),
        }
    }
    // Everything except the fills is unchanged.
    let strip = |s: &str| s.replace(&palette[1], "X").replace(&palette[3], "X");
    assert_eq!(strip(&frag), strip(&frag2));
}

#[test]
fn scatter_uses_one_scale_for_both_axes() {
    // Pair points spread 10x wider along x than along y.
    let xs = [-10.0, 10.0, -5.0, 5.0, 0.0, 2.0];
    let ys = [0.0, 0.0, -1.0, 1.0, 0.5, -0.5];
    let coords = DMatrix::from_fn(6, 2, |i, j| if j == 0 { xs[i] } else { ys[i] });
    let pp = PairProjection {
        class_a: 0,
        class_b: 1,
        axis1: LinearAxis::new(DVector::from_vec(vec![1.0, 0.0])).unwrap(),
        axis2: LinearAxis::new(DVector::from_vec(vec![0.0, 1.0])).unwrap(),
        coords,
        point_class: vec![0, 1, 0, 1, 0, 1],
    };
    let frag = render_scatter_cell(&pp, &default_palette(2), 200.0);
    let frag_xml = wrap(&frag);
    let doc = roxmltree::Document::parse(&frag_xml).unwrap();
    let (mut cx, mut cy) = (Vec::new(), Vec::new());
    for c in doc.descendants().filter(|n| n.has_tag_name("circle")) {
        cx.push(c.attribute("cx").unwrap().parse::<f64>().unwrap());
        cy.push(c.attribute("cy").unwrap().parse::<f64>().unwrap());
    }
    let extent = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
    let ratio = extent(&cy) / extent(&cx);
    assert!((ratio - 0.1).abs() < 1e-4, "ratio {ratio}");
    // The plot box is square and the pair fits inside it.
    let clip = doc.descendants().find(|n| n.has_tag_name("rect")).unwrap();
    assert_eq!(clip.attribute("width"), clip.attribute("height"));
    let side: f64 = clip.attribute("width").unwrap().parse().unwrap();
    assert!(extent(&cx) <= side);
}

fn summary(observed_auc: f64, aucba: f64, b: usize) -> BootstrapRocSummary<f64> {
    let curve = |auc| RocCurve {
        points: vec![(0.0, 0.0), (0.2, 0.7), (1.0, 1.0)],
        auc,
    };
    BootstrapRocSummary {
        observed: curve(observed_auc),
        bootstrap_curves: (0..b).map(|_| curve(aucba)).collect(),
        aucba,
        aucba_std: 0.03,
    }
}

#[test]
fn roc_cell_polylines_and_label() {
    let frag = render_roc_cell(&summary(0.94, 0.84, 100), 160.0);
    let frag_xml = wrap(&frag);
    let doc = roxmltree::Document::parse(&frag_xml).unwrap();
    let lines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
    let red = lines
        .iter()
        .filter(|n| n.attribute("stroke") == Some("#ff0000") && n.attribute("opacity") == Some("0.1"))
        .count();
    let blue = lines
        .iter()
        .filter(|n| n.attribute("stroke") == Some("#0000ff") && n.attribute("opacity") == Some("1"))
        .count();
    assert_eq!((red, blue, lines.len()), (100, 1, 101));
    // The observed curve is drawn last, on top.
    assert_eq!(lines.last().unwrap().attribute("stroke"), Some("#0000ff"));
    let label = doc.descendants().find(|n| n.has_tag_name("text")).unwrap().text().unwrap();
    assert!(label.contains("AUC=0.94"), "{label}");
    assert!(label.contains("AUCBA=0.84"), "{label}");
}

#[test]
fn perfect_roc_passes_through_top_left() {
    let observed = roc_curve(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]).unwrap();
    let s = BootstrapRocSummary::from_curves(observed.clone(), vec![observed]);
    let frag = render_roc_cell(&s, 160.0);
    let frag_xml = wrap(&frag);
    let doc = roxmltree::Document::parse(&frag_xml).unwrap();
    let frame = doc.descendants().find(|n| n.has_tag_name("rect")).unwrap();
    let x0: f64 = frame.attribute("x").unwrap().parse().unwrap();
    let y0: f64 = frame.attribute("y").unwrap().parse().unwrap();
    let blue = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("roc-observed"))
        .unwrap();
    let pts = parse_points(blue.attribute("points").unwrap());
    assert!(pts.iter().any(|&(x, y)| (x - x0).abs() < 1e-9 && (y - y0).abs() < 1e-9));
}

#[test]
fn auc_label_can_be_disabled() {
    let m = model(3, 4);
    let opts = RenderOptions {
        annotate_auc: false,
        ..RenderOptions::default()
    };
    let svg = render_classsplom(&m, &opts).unwrap();
    assert!(!svg.as_str().contains("AUCBA="));
    let svg = render_classsplom(&m, &RenderOptions::default()).unwrap();
    assert_eq!(svg.as_str().matches("AUCBA=").count(), 3);
}
