"""
conqar: 评论文本评分预测

子模块:
- numerics: 张量与反向自动微分
- corpus:   数据解析、词表、评论文档
- models:   卷积编码器、密度矩阵、互注意力、全连接层
- trainer:  训练、网格搜索、消融实验
- viz:      热力图与位置高亮导出
"""
