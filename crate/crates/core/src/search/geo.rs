/// Whether `p` lies inside or on the boundary of `polygon` (vertices in
/// order, implicitly closed). Uses even-odd ray casting.
pub fn point_in_polygon(p: [f64; 2], polygon: &[[f64; 2]]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    let [x, y] = p;
    let mut inside = false;
    for i in 0..n {
        let [xi, yi] = polygon[i];
        let [xj, yj] = polygon[(i + n - 1) % n];
        if on_segment(p, [xi, yi], [xj, yj]) {
            return true;
        }
        if (yi > y) != (yj > y) {
            let cross_x = xi + (y - yi) * (xj - xi) / (yj - yi);
            if x < cross_x {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    cross == 0.0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQUARE: [[f64; 2]; 4] = [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]];

    #[test]
    fn square_cases() {
        assert!(point_in_polygon([2.0, 2.0], &SQUARE));
        assert!(!point_in_polygon([5.0, 2.0], &SQUARE));
        assert!(point_in_polygon([0.0, 2.0], &SQUARE));
        assert!(point_in_polygon([4.0, 4.0], &SQUARE));
        assert!(point_in_polygon([2.0, 0.0], &SQUARE));
        assert!(!point_in_polygon([2.0, 0.0], &SQUARE[..2]));
    }

    #[test]
    fn concave_polygon() {
        // U shape open at the top between x=1 and x=3
        let u = [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [3.0, 4.0], [3.0, 1.0], [1.0, 1.0], [1.0, 4.0], [0.0, 4.0]];
        assert!(point_in_polygon([0.5, 3.0], &u));
        assert!(!point_in_polygon([2.0, 3.0], &u));
        assert!(point_in_polygon([2.0, 0.5], &u));
        assert!(point_in_polygon([2.0, 1.0], &u));
    }

    proptest! {
        #[test]
        fn box_polygon_matches_comparisons(
            x0 in -180i32..180, y0 in -90i32..90, w in 1i32..50, h in 1i32..50,
            px in -200i32..200, py in -100i32..100,
        ) {
            let (x0, y0, x1, y1) = (x0 as f64, y0 as f64, (x0 + w) as f64, (y0 + h) as f64);
            let poly = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
            let (px, py) = (px as f64, py as f64);
            let expected = px >= x0 && px <= x1 && py >= y0 && py <= y1;
            prop_assert_eq!(point_in_polygon([px, py], &poly), expected);
            let mut rev = poly;
            rev.reverse();
            prop_assert_eq!(point_in_polygon([px, py], &rev), expected);
        }
    }
}
