use std::sync::OnceLock;

use proptest::prelude::*;

use pbd_core::design::{verify_pbd, IncidenceDesign};
use pbd_core::flats::{generated_flat, restrict};
use pbd_core::inflation::construct_bounded_pbd;
use pbd_core::io::{parse, serialize, DesignFile};
use pbd_core::latin::{glue_latin, LatinSquare};

fn designs() -> &'static Vec<IncidenceDesign> {
    static CELL: OnceLock<Vec<IncidenceDesign>> = OnceLock::new();
    CELL.get_or_init(|| [15, 21, 40, 47, 64, 88].iter().map(|&v| construct_bounded_pbd(v).unwrap().0).collect())
}

fn design_and_seed() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (0..designs().len()).prop_flat_map(|i| {
        let v = designs()[i].v();
        (Just(i), proptest::collection::vec(0..v, 1..5), proptest::collection::vec(0..v, 0..3))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closure_is_idempotent_and_monotone((i, seed, extra) in design_and_seed()) {
        let d = &designs()[i];
        let flat = generated_flat(d, &seed).unwrap();
        prop_assert!(seed.iter().all(|x| flat.contains(x)));
        prop_assert_eq!(generated_flat(d, &flat).unwrap(), flat.clone());
        let mut bigger = seed.clone();
        bigger.extend(&extra);
        let wider = generated_flat(d, &bigger).unwrap();
        prop_assert!(flat.iter().all(|x| wider.contains(x)));
    }

    #[test]
    fn flats_restrict_to_linear_spaces((i, seed, _) in design_and_seed()) {
        let d = &designs()[i];
        let flat = generated_flat(d, &seed).unwrap();
        let sub = restrict(d, &flat).unwrap();
        prop_assert_eq!(sub.v(), flat.len());
        if flat.len() >= 3 {
            let sizes: Vec<usize> = d.block_size_histogram().into_keys().collect();
            prop_assert!(verify_pbd(&sub, &sizes).passed);
        }
    }

    #[test]
    fn serialization_round_trips(v in 1usize..130) {
        prop_assume!(![2, 6, 8].contains(&v));
        let (design, cert) = construct_bounded_pbd(v).unwrap();
        let file = DesignFile::from_pbd(&design, cert.to_meta(v as u64));
        let text = serialize(&file);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn glued_square_text_round_trips(v in 1usize..60) {
        prop_assume!(![2, 6, 8].contains(&v));
        let (design, _) = construct_bounded_pbd(v).unwrap();
        let sq = glue_latin(&design).unwrap().square;
        prop_assert!(sq.is_idempotent());
        prop_assert_eq!(LatinSquare::from_text(&sq.to_text()).unwrap(), sq);
    }
}
