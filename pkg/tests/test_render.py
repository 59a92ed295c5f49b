import pytest

from formlink.geometry import BBox
from formlink.ingest import Document, Entity, Label
from formlink.regions import Region, RegionKind
from formlink.render import OverlayScene, render_overlay, scene_from_document


def sample_document():
    doc = Document(
        "page",
        200,
        100,
        [
            Entity(0, Label.QUESTION, [], BBox(10, 10, 50, 20)),
            Entity(1, Label.ANSWER, [], BBox(70, 10, 110, 20)),
            Entity(2, Label.HEADER, [], BBox(10, 40, 60, 50)),
        ],
        regions=[
            Region(0, RegionKind.PARAGRAPH, BBox(5, 5, 115, 25)),
            Region(1, RegionKind.TABULAR, BBox(5, 35, 65, 55)),
        ],
        gold_links={(0, 1)},
    )
    return doc


class TestRenderOverlay:
    def test_empty_scene_valid_svg(self):
        svg = render_overlay(OverlayScene(100, 50, entities=[]))
        assert svg.startswith('<?xml version="1.0"')
        assert '<svg xmlns="http://www.w3.org/2000/svg" version="1.1"' in svg
        assert svg.count("<rect") == 1  # page background only
        assert "</svg>" in svg

    def test_single_link_one_blue_line(self):
        scene = scene_from_document(sample_document())
        svg = render_overlay(scene, mode="predictions")
        assert svg.count("<line") == 1
        assert 'stroke="#1f77b4"' in svg

    def test_prediction_colors(self):
        svg = render_overlay(scene_from_document(sample_document()), mode="predictions")
        assert 'stroke="#d62728"' in svg  # question outline red
        assert 'stroke="#2ca02c"' in svg  # answer outline green

    def test_regions_mode_colors_and_no_links(self):
        svg = render_overlay(scene_from_document(sample_document()), mode="regions")
        assert svg.count("<line") == 0
        assert 'stroke="#1f77b4"' in svg  # entity boxes blue
        assert 'stroke="#d62728"' in svg  # paragraph region red
        assert 'stroke="#2ca02c"' in svg  # tabular region green

    def test_byte_identical_for_identical_scenes(self):
        doc = sample_document()
        a = render_overlay(scene_from_document(doc))
        b = render_overlay(scene_from_document(doc))
        assert a == b

    def test_line_count_matches_links(self):
        doc = sample_document()
        scene = scene_from_document(doc, links=[(0, 1), (0, 1)])
        assert render_overlay(scene).count("<line") == 2

    def test_scores_embedded_as_titles(self):
        scene = scene_from_document(sample_document(), links=[(0, 1)], scores=[0.9876])
        assert "<title>0.9876</title>" in render_overlay(scene)

    def test_unknown_link_id_raises(self):
        with pytest.raises(KeyError):
            scene_from_document(sample_document(), links=[(0, 99)])

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            render_overlay(scene_from_document(sample_document()), mode="3d")
