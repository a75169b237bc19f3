import pytest

import cookiesync as cs


class TestSelection:
    @pytest.fixture(autouse=True)
    def _setup(self):
        self.graph = cs.RelationGraph(
            'M1',
            ('A', 'B', 'C', 'D', 'E'),
            {('A', 'B'): 1, ('A', 'C'): 1, ('B', 'C'): 1, ('C', 'D'): 1},
            {},
            {'A': 8, 'E': 6, 'D': 1},
            10,
        )

    def test_shares(self):
        shares = {s.company: s for s in cs.company_shares(self.graph)}
        assert shares['A'].embed_share == pytest.approx(0.8)
        assert shares['C'].sync_share == pytest.approx(0.75)
        assert shares['E'].sync_share == 0.0

    def test_select(self):
        selection = cs.select_analysis_corpus(self.graph, top_embed=2, top_sync=1)
        assert selection.companies == ('A', 'C', 'E')
        assert selection.embed_left_out == pytest.approx(0.1)
        assert selection.sync_left_out == pytest.approx(0.5)

    def test_select_everything(self):
        selection = cs.select_analysis_corpus(self.graph)
        assert selection.companies == ('A', 'B', 'C', 'D', 'E')
        assert selection.embed_left_out == 0.0

    def test_negative_sizes(self):
        with pytest.raises(ValueError, match='top_embed'):
            cs.select_analysis_corpus(self.graph, top_embed=-1)
