use kneser::lattice::{lattice_e, lattice_z, parse_lat, to_lat_string};
use kneser::neighbors::{enumerate_genus, GenusCatalog, GenusOptions};
use kneser::stats::{neighbor_matrix, petersson_check, write_stats_csv, StatsMode, StatsOptions};

#[test]
fn catalog_json_through_stats_csv() {
    let c = enumerate_genus(&lattice_z(9), 3, &GenusOptions::default()).unwrap();
    let back = GenusCatalog::from_json_str(&c.to_json_string()).unwrap();
    assert!(back.agrees_with(&c));
    assert_eq!(back.total_mass(), c.total_mass());
    let s = neighbor_matrix(&back, 3, StatsMode::Exact, &StatsOptions::default()).unwrap();
    petersson_check(&s).unwrap();
    let mut buf = Vec::new();
    write_stats_csv(&s, &mut buf).unwrap();
    let mut r = csv::Reader::from_reader(buf.as_slice());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    // counts per source class add up to the line count
    let total: u64 = rows
        .iter()
        .filter(|r| &r[1] == "Z9")
        .map(|r| r[3].parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 3280);
}

#[test]
fn lat_text_round_trip() {
    let e8 = lattice_e(8).unwrap();
    let text = to_lat_string(&e8);
    assert_eq!(parse_lat(&text).unwrap().gram(), e8.gram());
    let commented = format!("# E8\n{}", text.replace('\n', "  # row\n"));
    assert_eq!(parse_lat(&commented).unwrap().gram(), e8.gram());
    assert!(parse_lat("2\n1 1\n0 1\n").is_err());
    assert!(parse_lat("2\n1 2\n2 1\n").is_err());
}
